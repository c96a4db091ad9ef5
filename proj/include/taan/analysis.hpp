#pragma once

// Post-hoc inspection of trained models: per-layer task distance matrices,
// heatmap export, cluster recovery, and a Monte-Carlo check of the
// first-layer feature/activation bounds.

#include "taan/metrics.hpp"
#include "taan/moments.hpp"
#include "taan/network.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace taan {

struct LayerDistanceReport {
    int layer = 0;
    Eigen::MatrixXd distances;       // T x T, symmetric, zero diagonal
    std::vector<std::string> labels; // one per task
};

std::vector<std::string> default_task_labels(int task_count);

std::vector<LayerDistanceReport> layer_distances(const TaanModel& model, const GramCache& cache);

enum class HeatmapFormat { Csv, Pgm };

/// CSV: header of task labels, then the raw matrix. PGM: binary P5, the
/// largest entry maps to 255 and zero to 0 (light = far apart).
void export_heatmap(const LayerDistanceReport& report, const std::string& path, HeatmapFormat format);

/// 8-bit grey levels, row-major, as written to the PGM body.
std::vector<unsigned char> heatmap_pixels(const Eigen::MatrixXd& distances);

LayerDistanceReport load_heatmap_csv(const std::string& path, int layer = 0);

struct ClusterSeparation {
    double within = 0.0;  // mean distance over distinct task pairs in the same cluster
    double between = 0.0; // mean distance over pairs in different clusters
};

ClusterSeparation cluster_separation(const Eigen::MatrixXd& distances, const std::vector<int>& clusters);

/// Gaussian law of the network input.
struct InputLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    static InputLaw standard_normal(int dim);
};

/// Exact per-unit law of the first pre-activation W1 x + b1 when x follows `law`.
std::vector<moments::GaussianParams> first_layer_unit_gaussians(const TaanModel& model,
                                                                const InputLaw& law);

struct BoundPairResult {
    int t1 = 0;
    int t2 = 0;
    // E[(h1^t1)^T h1^t2] and its bound C1 * sum_n <F^t1, F^t2>_n.
    double inner_left = 0.0;
    double inner_stderr = 0.0;
    double inner_right = 0.0;
    // E[||h1^t1 - h1^t2||^2] and its bound C1 * sum_n d_n(F^t1, F^t2).
    // The standard error is exactly zero when t1 == t2.
    double dist_left = 0.0;
    double dist_stderr = 0.0;
    double dist_right = 0.0;

    bool inner_holds() const { return inner_left <= inner_right + 3.0 * inner_stderr; }
    bool dist_holds() const { return dist_left <= dist_right + 3.0 * dist_stderr; }
    bool inner_tight() const { return std::abs(inner_left - inner_right) <= 3.0 * inner_stderr; }
    bool dist_tight() const { return std::abs(dist_left - dist_right) <= 3.0 * dist_stderr; }
    bool passed() const { return inner_holds() && dist_holds(); }
};

struct BoundCheckReport {
    double envelope = 1.0;
    long samples = 0;
    std::uint64_t seed = 0;
    std::vector<BoundPairResult> pairs;

    bool passed() const;
    void write_text(std::ostream& out) const;
    void write_csv(std::ostream& out) const;
};

/// Samples x from `law`, forms the first hidden features of both tasks and
/// compares their Monte-Carlo moments with the closed-form right-hand sides
/// under `unit_gaussians` scaled by `envelope`. Throws InvalidArgument for
/// envelope <= 0, mc_samples < 2 or a unit count that does not match layer 1.
BoundCheckReport check_l1_bounds(const TaanModel& model,
                                 const std::vector<moments::GaussianParams>& unit_gaussians,
                                 double envelope, const std::vector<std::pair<int, int>>& pairs,
                                 long mc_samples, std::uint64_t seed, const InputLaw& law);

} // namespace taan
