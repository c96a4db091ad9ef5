#pragma once

// Penalties on a layer's T x M coordinate matrix that couple the per-task
// activations, and the composite multi-task objective.

#include "taan/metrics.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace taan {

enum class RegularizerKind { None, TraceNorm, Cosine, Distance };

/// "none", "trace", "cos", "dis".
std::string_view to_string(RegularizerKind kind);
RegularizerKind parse_regularizer_kind(std::string_view name);

struct RegConfig {
    RegularizerKind kind = RegularizerKind::None;
    double coefficient = 0.0;

    /// Throws InvalidArgument for a negative or non-finite coefficient.
    void validate() const;
};

/// Sum of singular values.
double trace_norm(const Eigen::MatrixXd& alpha);

/// U V^T from the thin SVD, keeping only directions with singular value
/// above 1e-10.
Eigen::MatrixXd trace_norm_grad(const Eigen::MatrixXd& alpha);

/// -(1/T^2) sum_ij cos(F_i, F_j), diagonal included.
double cosine_reg(const Eigen::MatrixXd& alpha, const GramCache& cache);

/// (1/T^2) sum_ij distance_sq(F_i, F_j).
double distance_reg(const Eigen::MatrixXd& alpha, const GramCache& cache);

double reg_value(RegularizerKind kind, const Eigen::MatrixXd& alpha, const GramCache& cache);
Eigen::MatrixXd reg_grad(RegularizerKind kind, const Eigen::MatrixXd& alpha,
                         const GramCache& cache);

/// sum_t task_losses[t] + c * sum_l L(alpha_l).
double total_loss(const Eigen::VectorXd& task_losses,
                  const std::vector<Eigen::MatrixXd>& per_layer_alphas, const RegConfig& config,
                  const GramCache& cache);

} // namespace taan
