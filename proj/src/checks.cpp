#include "taan/checks.hpp"

#include "taan/apl.hpp"
#include "taan/errors.hpp"
#include "taan/metrics.hpp"
#include "taan/moments.hpp"
#include "taan/network.hpp"
#include "taan/regularizers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

namespace taan::checks {

void print(const std::vector<SuiteResult>& suites, std::ostream& out) {
    for (const auto& s : suites) {
        out << (s.passed() ? "PASS " : "FAIL ") << std::left << std::setw(28) << s.name
            << " cases=" << std::setw(6) << s.cases << " worst=" << std::scientific
            << std::setprecision(3) << s.worst << " tol=" << s.tolerance << std::defaultfloat
            << '\n';
    }
}

bool all_passed(const std::vector<SuiteResult>& suites) {
    return !suites.empty() &&
           std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

std::vector<SuiteResult> moment_suites(std::uint64_t seed, int random_cases) {
    using moments::BasisPair;
    using moments::GaussianParams;
    SuiteResult relu{"moment_b0_sq", 0, 0.0, 1e-8};
    SuiteResult mixed{"moment_b0b", 0, 0.0, 1e-8};
    SuiteResult hinge{"moment_bb", 0, 0.0, 1e-8};

    auto check = [&](double mu, double sigma, double bi, double bj) {
        const GaussianParams g{mu, sigma};
        auto record = [](SuiteResult& s, double closed, double oracle) {
            s.worst = std::max(s.worst, std::abs(closed - oracle));
            ++s.cases;
        };
        record(relu, moments::moment_b0_sq(g), moments::oracle_moment({BasisPair::ReluRelu, 0, 0}, g));
        record(mixed, moments::moment_b0b(bi, g),
               moments::oracle_moment({BasisPair::ReluHinge, bi, 0}, g));
        record(hinge, moments::moment_bb(bi, bj, g),
               moments::oracle_moment({BasisPair::HingeHinge, bi, bj}, g));
    };

    const double mus[] = {-3.0, -1.5, 0.0, 1.5, 3.0};
    const double sigmas[] = {0.3, 1.0, 3.0};
    const double bs[] = {-2.0, -1.0, 0.0, 0.5, 1.5, 3.0};
    for (double mu : mus) {
        for (double sigma : sigmas) {
            for (std::size_t i = 0; i < std::size(bs); ++i) {
                for (std::size_t j = i; j < std::size(bs); ++j) {
                    check(mu, sigma, bs[i], bs[j]);
                }
            }
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu_dist(-3.0, 3.0);
    std::uniform_real_distribution<double> sigma_dist(0.3, 3.0);
    std::uniform_real_distribution<double> b_dist(-2.0, 3.0);
    for (int k = 0; k < random_cases; ++k) {
        const double mu = mu_dist(rng);
        const double sigma = sigma_dist(rng);
        const double bi = b_dist(rng);
        const double bj = b_dist(rng);
        check(mu, sigma, bi, bj);
    }
    return {relu, mixed, hinge};
}

double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

BasisGrid random_grid(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> dist(-2.5, 2.5);
    while (true) {
        std::vector<double> points(static_cast<std::size_t>(m));
        for (auto& p : points) p = dist(rng);
        std::sort(points.begin(), points.end());
        bool spaced = true;
        for (std::size_t i = 1; i < points.size(); ++i) {
            spaced = spaced && points[i] - points[i - 1] > 1e-2;
        }
        if (spaced) return BasisGrid(std::move(points));
    }
}

Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
    return m;
}

GaussianMixture random_mixture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(0.2, 0.8);
    std::uniform_real_distribution<double> mu(-1.0, 1.0);
    std::uniform_real_distribution<double> sigma(0.5, 1.5);
    const double p = w(rng);
    return GaussianMixture({{p, {mu(rng), sigma(rng)}}, {1.0 - p, {mu(rng), sigma(rng)}}});
}

bool near_hinge(double x, const BasisGrid& grid, double margin) {
    if (std::abs(x) < margin) return true;
    return std::any_of(grid.breakpoints().begin(), grid.breakpoints().end(),
                       [&](double b) { return std::abs(x - b) < margin; });
}

} // namespace

SuiteResult apl_grad_x_suite(std::uint64_t seed, int points) {
    SuiteResult s{"apl_grad_x", 0, 0.0, kGradientTolerance};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> m_dist(1, 8);
    std::uniform_real_distribution<double> x_dist(-3.0, 3.0);
    const double h = kFiniteDifferenceStep;
    while (s.cases < points) {
        const BasisGrid grid = random_grid(rng, m_dist(rng));
        const Eigen::VectorXd coords = uniform_matrix(rng, grid.size(), 1, 1.0);
        const double x = x_dist(rng);
        if (near_hinge(x, grid, 1e-3)) continue;
        const double numeric = (apl_eval(x + h, coords, grid) - apl_eval(x - h, coords, grid)) / (2 * h);
        s.worst = std::max(s.worst, relative_error(apl_grad_x(x, coords, grid), numeric));
        ++s.cases;
    }
    return s;
}

SuiteResult apl_grad_coords_suite(std::uint64_t seed, int points) {
    SuiteResult s{"apl_grad_coords", 0, 0.0, kGradientTolerance};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> m_dist(1, 8);
    std::uniform_real_distribution<double> x_dist(-3.0, 3.0);
    const double h = kFiniteDifferenceStep;
    while (s.cases < points) {
        const BasisGrid grid = random_grid(rng, m_dist(rng));
        Eigen::VectorXd coords = uniform_matrix(rng, grid.size(), 1, 1.0);
        const double x = x_dist(rng);
        const Eigen::VectorXd analytic = apl_grad_coords(x, grid);
        for (int i = 0; i < grid.size(); ++i) {
            const double saved = coords[i];
            coords[i] = saved + h;
            const double up = apl_eval(x, coords, grid);
            coords[i] = saved - h;
            const double down = apl_eval(x, coords, grid);
            coords[i] = saved;
            s.worst = std::max(s.worst, relative_error(analytic[i], (up - down) / (2 * h)));
        }
        ++s.cases;
    }
    return s;
}

SuiteResult regularizer_grad_suite(RegularizerKind kind, std::uint64_t seed, int points) {
    SuiteResult s{"reg_grad_" + std::string(to_string(kind)), 0, 0.0, kGradientTolerance};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> t_dist(2, 5);
    std::uniform_int_distribution<int> m_dist(2, 6);
    const double h = kFiniteDifferenceStep;
    while (s.cases < points) {
        const int t = t_dist(rng);
        const int m = m_dist(rng);
        const BasisGrid grid = random_grid(rng, m);
        const GramCache cache = build_gram(grid, random_mixture(rng));
        Eigen::MatrixXd alpha = uniform_matrix(rng, t, m, 1.0);
        if (kind == RegularizerKind::TraceNorm) {
            // Stay away from rank deficiency and repeated singular values.
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(alpha);
            const auto& sv = svd.singularValues();
            bool separated = sv[sv.size() - 1] > 1e-2;
            for (Eigen::Index i = 1; i < sv.size(); ++i) separated = separated && sv[i - 1] - sv[i] > 1e-3;
            if (!separated) continue;
        }
        const Eigen::MatrixXd analytic = reg_grad(kind, alpha, cache);
        for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
            for (Eigen::Index c = 0; c < alpha.cols(); ++c) {
                const double saved = alpha(r, c);
                alpha(r, c) = saved + h;
                const double up = reg_value(kind, alpha, cache);
                alpha(r, c) = saved - h;
                const double down = reg_value(kind, alpha, cache);
                alpha(r, c) = saved;
                s.worst = std::max(s.worst, relative_error(analytic(r, c), (up - down) / (2 * h)));
            }
        }
        ++s.cases;
    }
    return s;
}

SuiteResult network_backward_suite(std::uint64_t seed, int points) {
    SuiteResult s{"network_backward", 0, 0.0, kGradientTolerance};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ArchitectureSpec arch;
    arch.input_dim = 3;
    arch.hidden_widths = {5, 5};
    arch.output_dim = 2;
    arch.task_count = 3;
    arch.basis_count = 4;
    const double h = kFiniteDifferenceStep;

    while (s.cases < points) {
        TaanModel model = build_model(arch, rng());
        for (auto& a : model.params().alphas) a = uniform_matrix(rng, a.rows(), a.cols(), 0.5);
        for (auto& l : model.params().layers) l.b = uniform_matrix(rng, l.b.size(), 1, 0.5);
        const int task = static_cast<int>(rng() % static_cast<std::uint64_t>(arch.task_count));
        Eigen::MatrixXd x(4, arch.input_dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        Eigen::MatrixXd weights(4, arch.output_dim);
        for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = normal(rng);

        const auto base = forward(model, task, x);
        bool degenerate = false;
        for (const auto& pre : base.trace.pre) {
            for (Eigen::Index i = 0; i < pre.size(); ++i) {
                degenerate = degenerate || near_hinge(pre.data()[i], model.grid(), 1e-4);
            }
        }
        if (degenerate) continue;

        // Scalar objective sum(weights .* outputs); its output gradient is `weights`.
        const ParameterSet analytic = backward(model, base.trace, weights);
        auto objective = [&](const TaanModel& m) {
            return (forward(m, task, x).outputs.array() * weights.array()).sum();
        };
        TaanModel probe = model;
        zip_tensors(
            [&](auto& p, const auto& g) {
                for (Eigen::Index i = 0; i < p.size(); ++i) {
                    const double saved = p.data()[i];
                    p.data()[i] = saved + h;
                    const double up = objective(probe);
                    p.data()[i] = saved - h;
                    const double down = objective(probe);
                    p.data()[i] = saved;
                    s.worst = std::max(s.worst, relative_error(g.data()[i], (up - down) / (2 * h)));
                }
            },
            probe.params(), analytic);
        ++s.cases;
    }
    return s;
}

std::vector<SuiteResult> gradient_suites(std::uint64_t seed, int points) {
    return {apl_grad_x_suite(seed, points),
            apl_grad_coords_suite(seed + 1, points),
            regularizer_grad_suite(RegularizerKind::TraceNorm, seed + 2, points),
            regularizer_grad_suite(RegularizerKind::Cosine, seed + 3, points),
            regularizer_grad_suite(RegularizerKind::Distance, seed + 4, points),
            network_backward_suite(seed + 5, points)};
}

BoundCheckReport exact_gaussian_bound_check(std::uint64_t seed, long samples, double envelope,
                                            const BoundConstruction& construction) {
    ArchitectureSpec arch;
    arch.input_dim = construction.input_dim;
    arch.hidden_widths = {construction.hidden};
    arch.output_dim = 1;
    arch.task_count = construction.task_count;
    arch.basis_count = construction.basis_count;
    TaanModel model = build_model(arch, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto& first = model.params().layers.front();
    first.b = uniform_matrix(rng, first.b.size(), 1, 0.5);
    model.params().alphas.front() = uniform_matrix(rng, arch.task_count, arch.basis_count,
                                                   construction.coord_scale);

    const InputLaw law = InputLaw::standard_normal(arch.input_dim);
    const auto units = first_layer_unit_gaussians(model, law);
    return check_l1_bounds(model, units, envelope, {{0, 0}, {0, 1}}, samples, seed, law);
}

} // namespace taan::checks
