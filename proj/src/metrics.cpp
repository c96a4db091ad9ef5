#include "taan/metrics.hpp"

#include "taan/errors.hpp"

#include <cmath>
#include <string>

namespace taan {

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) {
        throw InvalidArgument("mixture needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (!std::isfinite(c.weight) || c.weight < 0.0) {
            throw InvalidArgument("mixture weights must be finite and nonnegative");
        }
        moments::validate(c.gaussian);
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidArgument("mixture weights must sum to 1");
    }
}

GaussianMixture GaussianMixture::standard_normal() {
    return GaussianMixture({MixtureComponent{1.0, {0.0, 1.0}}});
}

GramCache build_gram(const BasisGrid& grid, const GaussianMixture& mix) {
    const int m = grid.size();
    GramCache cache;
    cache.v = Eigen::VectorXd::Zero(m);
    cache.G = Eigen::MatrixXd::Zero(m, m);
    for (const auto& comp : mix.components()) {
        const double w = comp.weight;
        const auto& g = comp.gaussian;
        cache.s += w * moments::moment_b0_sq(g);
        for (int i = 0; i < m; ++i) {
            cache.v[i] += w * moments::moment_b0b(grid[i], g);
            for (int j = 0; j <= i; ++j) {
                const double e = w * moments::moment_bb(grid[i], grid[j], g);
                cache.G(i, j) += e;
                if (j != i) {
                    cache.G(j, i) += e;
                }
            }
        }
    }
    return cache;
}

namespace {

void check_length(const CoordsRef& c, const GramCache& cache) {
    if (c.size() != cache.size()) {
        throw ShapeError("coordinate vector has length " + std::to_string(c.size()) +
                         ", Gram cache has " + std::to_string(cache.size()));
    }
}

} // namespace

double inner_product(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache) {
    check_length(c1, cache);
    check_length(c2, cache);
    return cache.s + (c1 + c2).dot(cache.v) + c1.dot(cache.G * c2);
}

double distance_sq(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache) {
    check_length(c1, cache);
    check_length(c2, cache);
    const Eigen::VectorXd diff = c1 - c2;
    const double d = diff.dot(cache.G * diff);
    return d > 0.0 ? d : 0.0;
}

double norm(const CoordsRef& c, const GramCache& cache) {
    const double self = inner_product(c, c, cache);
    if (self < -1e-10) {
        throw NumericError("negative self inner product " + std::to_string(self) +
                           "; Gram cache is not positive semidefinite");
    }
    return self > 0.0 ? std::sqrt(self) : 0.0;
}

double cosine_similarity(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache) {
    const double n1 = norm(c1, cache);
    const double n2 = norm(c2, cache);
    if (n1 <= kDegenerateNormEpsilon || n2 <= kDegenerateNormEpsilon) {
        throw DegenerateFunctionError("activation function has near-zero weighted norm");
    }
    return inner_product(c1, c2, cache) / (n1 * n2);
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    if (alpha.cols() != cache.size()) {
        throw ShapeError("coordinate matrix has " + std::to_string(alpha.cols()) +
                         " columns, Gram cache has " + std::to_string(cache.size()));
    }
    const Eigen::Index t = alpha.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        for (Eigen::Index j = i + 1; j < t; ++j) {
            const double d = distance_sq(alpha.row(i).transpose(), alpha.row(j).transpose(), cache);
            out(i, j) = d;
            out(j, i) = d;
        }
    }
    return out;
}

} // namespace taan
