#pragma once

// Test-only reference computations, kept independent of the library code
// paths they are compared against.

#include "taan/apl.hpp"
#include "taan/metrics.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace taan::oracle {

/// Singular values by one-sided Jacobi rotations (Hestenes), sorted descending.
inline std::vector<double> jacobi_singular_values(Eigen::MatrixXd a) {
    if (a.rows() < a.cols()) {
        a.transposeInPlace();
    }
    const Eigen::Index n = a.cols();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = a.col(p).squaredNorm();
                const double beta = a.col(q).squaredNorm();
                const double gamma = a.col(p).dot(a.col(q));
                if (gamma == 0.0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Eigen::VectorXd cp = a.col(p);
                a.col(p) = c * cp - s * a.col(q);
                a.col(q) = s * cp + c * a.col(q);
            }
        }
        if (off < 1e-15) break;
    }
    std::vector<double> sv(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sv[static_cast<std::size_t>(i)] = a.col(i).norm();
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

/// Plain hinge-sum evaluation of F(x), written out from the definition.
inline double apl_direct(double x, const Eigen::VectorXd& coords, const BasisGrid& grid) {
    double y = std::max(0.0, x);
    for (int i = 0; i < grid.size(); ++i) y += coords[i] * std::max(0.0, -x + grid[i]);
    return y;
}

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Monte-Carlo E[f_k(X)] for every component of f's returned array, X drawn
/// from the mixture.
template <std::size_t N, class F>
std::array<McEstimate, N> monte_carlo_many(const GaussianMixture& mix, long samples, std::uint64_t seed,
                                           F&& f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& comps = mix.components();
    std::array<double, N> sum{};
    std::array<double, N> sum_sq{};
    for (long i = 0; i < samples; ++i) {
        double u = pick(rng);
        std::size_t k = 0;
        while (k + 1 < comps.size() && u >= comps[k].weight) {
            u -= comps[k].weight;
            ++k;
        }
        const double x = comps[k].gaussian.mu + comps[k].gaussian.sigma * normal(rng);
        const std::array<double, N> v = f(x);
        for (std::size_t j = 0; j < N; ++j) {
            sum[j] += v[j];
            sum_sq[j] += v[j] * v[j];
        }
    }
    const double n = static_cast<double>(samples);
    std::array<McEstimate, N> out;
    for (std::size_t j = 0; j < N; ++j) {
        const double mean = sum[j] / n;
        const double var = std::max(0.0, (sum_sq[j] - n * mean * mean) / (n - 1.0));
        out[j] = {mean, std::sqrt(var / n)};
    }
    return out;
}

/// Monte-Carlo E[f(X)] with X drawn from the mixture.
template <class F>
McEstimate monte_carlo(const GaussianMixture& mix, long samples, std::uint64_t seed, F&& f) {
    return monte_carlo_many<1>(mix, samples, seed, [&](double x) { return std::array<double, 1>{f(x)}; })[0];
}

} // namespace taan::oracle
