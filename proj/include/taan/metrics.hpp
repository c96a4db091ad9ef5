#pragma once

// Function-space metrics between APL activations, weighted by a Gaussian
// mixture. Every quantity reduces to quadratic forms in the coordinates
// through a cached Gram structure.

#include "taan/apl.hpp"
#include "taan/moments.hpp"

#include <Eigen/Core>

#include <vector>

namespace taan {

struct MixtureComponent {
    double weight = 1.0;
    moments::GaussianParams gaussian;
};

class GaussianMixture {
public:
    /// Throws InvalidArgument unless weights are >= 0 and sum to 1 within
    /// 1e-12, and every component is a valid Gaussian.
    explicit GaussianMixture(std::vector<MixtureComponent> components);

    static GaussianMixture standard_normal();

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }

private:
    std::vector<MixtureComponent> components_;
};

/// Mixture-weighted moments:
///   s    = E[B0^2]
///   v_i  = E[B0 B_{b_i}]
///   G_ij = E[B_{b_i} B_{b_j}]
struct GramCache {
    double s = 0.0;
    Eigen::VectorXd v;
    Eigen::MatrixXd G;

    int size() const noexcept { return static_cast<int>(v.size()); }
};

GramCache build_gram(const BasisGrid& grid, const GaussianMixture& mix);

/// <F1, F2> = s + (c1 + c2)^T v + c1^T G c2.
double inner_product(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache);

/// Weighted squared L2 distance (c1 - c2)^T G (c1 - c2); the ReLU parts cancel.
double distance_sq(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache);

/// sqrt(<F, F>). Self inner products below -1e-10 throw NumericError; smaller
/// negative rounding is clamped to zero.
double norm(const CoordsRef& c, const GramCache& cache);

inline constexpr double kDegenerateNormEpsilon = 1e-12;

/// Throws DegenerateFunctionError when either norm is <= 1e-12.
double cosine_similarity(const CoordsRef& c1, const CoordsRef& c2, const GramCache& cache);

/// T x T matrix of distance_sq between rows of `alpha`.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& alpha, const GramCache& cache);

} // namespace taan
