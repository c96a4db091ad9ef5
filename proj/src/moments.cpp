#include "taan/moments.hpp"

#include "taan/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace taan::moments {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

// Standard normal density at z.
double density(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " must be finite");
    }
}

} // namespace

void validate(const GaussianParams& g) {
    require_finite(g.mu, "mu");
    require_finite(g.sigma, "sigma");
    if (!(g.sigma > 0.0)) {
        throw InvalidArgument("sigma must be positive");
    }
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double moment_b0_sq(const GaussianParams& g) {
    validate(g);
    const double mu = g.mu;
    const double s = g.sigma;
    const double z = mu / s;
    // 1 - Phi(-z) == Phi(z)
    const double value = (mu * mu + s * s) * std_normal_cdf(z) + mu * s * density(z);
    return std::max(value, 0.0);
}

double moment_bb(double bi, double bj, const GaussianParams& g) {
    require_finite(bi, "breakpoint");
    require_finite(bj, "breakpoint");
    validate(g);
    const double mu = g.mu;
    const double s = g.sigma;
    const double lo = std::min(bi, bj);
    const double z = (lo - mu) / s;
    // Symmetric expressions of (bi, bj) only, so swapping arguments is exact.
    const double value = (mu * mu + s * s + bi * bj - (bi + bj) * mu) * std_normal_cdf(z) +
                         (bi + bj - mu - lo) * s * density(z);
    return std::max(value, 0.0);
}

double moment_b0b(double b, const GaussianParams& g) {
    require_finite(b, "breakpoint");
    validate(g);
    if (b <= 0.0) {
        return 0.0;
    }
    const double mu = g.mu;
    const double s = g.sigma;
    const double za = -mu / s;
    const double zb = (b - mu) / s;
    // Phi(zb) - Phi(za) computed from the tail that keeps precision.
    const double mass = (za > 0.0) ? std_normal_cdf(-za) - std_normal_cdf(-zb)
                                   : std_normal_cdf(zb) - std_normal_cdf(za);
    // E[X (b - X) 1{0 < X < b}]. The coefficient on density(za) is (b - mu).
    const double value = (b * mu - mu * mu - s * s) * mass + s * mu * density(zb) +
                         s * (b - mu) * density(za);
    return std::max(value, 0.0);
}

double oracle_moment(const BasisPairSpec& spec, const GaussianParams& g) {
    validate(g);
    require_finite(spec.b1, "breakpoint");
    require_finite(spec.b2, "breakpoint");

    const double mu = g.mu;
    const double s = g.sigma;
    auto relu = [](double x) { return x > 0.0 ? x : 0.0; };
    auto integrand = [&](double x) {
        double f = 0.0;
        switch (spec.pair) {
        case BasisPair::ReluRelu:
            f = relu(x) * relu(x);
            break;
        case BasisPair::ReluHinge:
            f = relu(x) * relu(spec.b1 - x);
            break;
        case BasisPair::HingeHinge:
            f = relu(spec.b1 - x) * relu(spec.b2 - x);
            break;
        }
        const double z = (x - mu) / s;
        return f * density(z) / s;
    };

    const double lo = mu - 12.0 * s;
    const double hi = mu + 12.0 * s;
    std::vector<double> cuts{lo, hi};
    for (double h : {0.0, spec.b1, spec.b2}) {
        if (h > lo && h < hi) {
            cuts.push_back(h);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double error = 0.0;
        total += Quadrature::integrate(integrand, cuts[k], cuts[k + 1], 15, 1e-12, &error);
        total_error += error;
    }
    if (!(total_error <= 1e-10) || !std::isfinite(total)) {
        std::ostringstream msg;
        msg << "quadrature did not converge: estimate " << total << ", error " << total_error
            << " (mu=" << mu << ", sigma=" << s << ", b1=" << spec.b1 << ", b2=" << spec.b2
            << ")";
        throw NumericError(msg.str());
    }
    return total;
}

} // namespace taan::moments
