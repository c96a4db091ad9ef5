#include "taan/regularizers.hpp"

#include "taan/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace taan {

namespace {

constexpr double kSingularThreshold = 1e-10;

void check_alpha(const Eigen::MatrixXd& alpha) {
    if (alpha.rows() < 1 || alpha.cols() < 1) {
        throw ShapeError("coordinate matrix must be non-empty");
    }
    if (!alpha.allFinite()) {
        throw InvalidArgument("coordinate matrix has non-finite entries");
    }
}

void check_alpha(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    check_alpha(alpha);
    if (alpha.cols() != cache.size()) {
        throw ShapeError("coordinate matrix has " + std::to_string(alpha.cols()) +
                         " columns, Gram cache has " + std::to_string(cache.size()));
    }
}

Eigen::BDCSVD<Eigen::MatrixXd> thin_svd(const Eigen::MatrixXd& alpha) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(alpha, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NumericError("SVD of coordinate matrix did not converge");
    }
    return svd;
}

} // namespace

std::string_view to_string(RegularizerKind kind) {
    switch (kind) {
    case RegularizerKind::None:
        return "none";
    case RegularizerKind::TraceNorm:
        return "trace";
    case RegularizerKind::Cosine:
        return "cos";
    case RegularizerKind::Distance:
        return "dis";
    }
    return "none";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
    if (name == "none") return RegularizerKind::None;
    if (name == "trace") return RegularizerKind::TraceNorm;
    if (name == "cos") return RegularizerKind::Cosine;
    if (name == "dis") return RegularizerKind::Distance;
    throw InvalidArgument("unknown regularizer '" + std::string(name) +
                          "' (expected none, trace, cos or dis)");
}

void RegConfig::validate() const {
    if (!std::isfinite(coefficient) || coefficient < 0.0) {
        throw InvalidArgument("regularization coefficient must be finite and >= 0");
    }
}

double trace_norm(const Eigen::MatrixXd& alpha) {
    check_alpha(alpha);
    return thin_svd(alpha).singularValues().sum();
}

Eigen::MatrixXd trace_norm_grad(const Eigen::MatrixXd& alpha) {
    check_alpha(alpha);
    const auto svd = thin_svd(alpha);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > kSingularThreshold) {
        ++rank;
    }
    return svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
}

double cosine_reg(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    check_alpha(alpha, cache);
    const Eigen::Index t = alpha.rows();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            sum += cosine_similarity(alpha.row(i).transpose(), alpha.row(j).transpose(), cache);
        }
    }
    return -sum / static_cast<double>(t * t);
}

double distance_reg(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    check_alpha(alpha, cache);
    const Eigen::MatrixXd d = distance_matrix(alpha, cache);
    return d.sum() / static_cast<double>(alpha.rows() * alpha.rows());
}

double reg_value(RegularizerKind kind, const Eigen::MatrixXd& alpha, const GramCache& cache) {
    switch (kind) {
    case RegularizerKind::None:
        return 0.0;
    case RegularizerKind::TraceNorm:
        return trace_norm(alpha);
    case RegularizerKind::Cosine:
        return cosine_reg(alpha, cache);
    case RegularizerKind::Distance:
        return distance_reg(alpha, cache);
    }
    return 0.0;
}

namespace {

// Row t of the result is d/d(alpha_t) of (1/T^2) sum_ij (a_i - a_j)^T G (a_i - a_j),
// i.e. (4/T^2) sum_j G (a_t - a_j) = (4/T^2) G (T a_t - sum_j a_j).
Eigen::MatrixXd distance_grad(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    const auto t = static_cast<double>(alpha.rows());
    const Eigen::RowVectorXd total = alpha.colwise().sum();
    const Eigen::MatrixXd centered = (t * alpha).rowwise() - total;
    return (4.0 / (t * t)) * centered * cache.G; // G symmetric
}

// With p_ij = <F_i, F_j> and C_ij = p_ij / sqrt(p_ii p_jj):
//   dC_tj/da_t = (v + G a_j) / (n_t n_j) - C_tj (v + G a_t) / p_tt,  j != t,
// and C_tt == 1. C is symmetric, so dL/da_t = -(2/T^2) sum_{j != t} dC_tj/da_t.
Eigen::MatrixXd cosine_grad(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    const Eigen::Index t = alpha.rows();
    const Eigen::Index m = alpha.cols();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(t, m);
    if (t == 1) {
        return grad;
    }
    // Row i of `pulled` is (v + G a_i)^T.
    const Eigen::MatrixXd pulled = (alpha * cache.G).rowwise() + cache.v.transpose();
    Eigen::VectorXd norms(t);
    for (Eigen::Index i = 0; i < t; ++i) {
        norms[i] = norm(alpha.row(i).transpose(), cache);
        if (norms[i] <= kDegenerateNormEpsilon) {
            throw DegenerateFunctionError("activation function has near-zero weighted norm");
        }
    }
    const double scale = -2.0 / static_cast<double>(t * t);
    for (Eigen::Index i = 0; i < t; ++i) {
        const double self = norms[i] * norms[i];
        for (Eigen::Index j = 0; j < t; ++j) {
            if (j == i) {
                continue;
            }
            const double p = inner_product(alpha.row(i).transpose(), alpha.row(j).transpose(),
                                           cache);
            const double c = p / (norms[i] * norms[j]);
            grad.row(i) += scale * (pulled.row(j) / (norms[i] * norms[j]) - c * pulled.row(i) / self);
        }
    }
    return grad;
}

} // namespace

Eigen::MatrixXd reg_grad(RegularizerKind kind, const Eigen::MatrixXd& alpha,
                         const GramCache& cache) {
    switch (kind) {
    case RegularizerKind::None:
        check_alpha(alpha);
        return Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols());
    case RegularizerKind::TraceNorm:
        return trace_norm_grad(alpha);
    case RegularizerKind::Cosine:
        check_alpha(alpha, cache);
        return cosine_grad(alpha, cache);
    case RegularizerKind::Distance:
        check_alpha(alpha, cache);
        return distance_grad(alpha, cache);
    }
    return {};
}

double total_loss(const Eigen::VectorXd& task_losses,
                  const std::vector<Eigen::MatrixXd>& per_layer_alphas, const RegConfig& config,
                  const GramCache& cache) {
    config.validate();
    double penalty = 0.0;
    for (const auto& alpha : per_layer_alphas) {
        if (alpha.rows() != task_losses.size()) {
            throw ShapeError("coordinate matrix has " + std::to_string(alpha.rows()) +
                             " rows but there are " + std::to_string(task_losses.size()) +
                             " task losses");
        }
        if (config.coefficient != 0.0) {
            penalty += reg_value(config.kind, alpha, cache);
        }
    }
    return task_losses.sum() + config.coefficient * penalty;
}

} // namespace taan
