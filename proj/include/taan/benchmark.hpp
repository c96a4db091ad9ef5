#pragma once

// Planted-cluster benchmark: TAAN trained at several distance-regularizer
// strengths next to independent single-task networks, on synthetic tasks
// whose cluster structure is known.

#include "taan/analysis.hpp"
#include "taan/data.hpp"
#include "taan/network.hpp"
#include "taan/training.hpp"

#include <cstdint>
#include <vector>

namespace taan {

struct PlantedBenchmark {
    SyntheticSpec data;            // seed is overwritten per run
    std::vector<int> hidden_widths{32, 32};
    int basis_count = 16;
    TrainConfig train;             // reg and seed are overwritten per run
    std::vector<double> coefficients{0.0, 0.1, 1.0, 10.0};
    RegularizerKind kind = RegularizerKind::Distance;

    /// T = 8 tasks in 2 clusters, 1000 samples per task, relatedness 0.3,
    /// 100 epochs of Adam at learning rate 1e-3.
    static PlantedBenchmark defaults();
    ArchitectureSpec architecture(int task_count) const;
};

struct CoefficientRun {
    double coefficient = 0.0;
    double test_mse = 0.0;               // mean over tasks
    double val_mse = 0.0;                // mean over tasks
    double mean_pairwise_distance = 0.0; // final epoch, mean over layers
    ClusterSeparation last_layer;
    TrainingHistory history;
};

struct BenchmarkSeedResult {
    std::uint64_t seed = 0;
    std::vector<CoefficientRun> runs; // one per coefficient, in order
    double stl_test_mse = 0.0;        // mean over tasks

    /// The run with coefficient 0.
    const CoefficientRun& unregularized() const;
    /// Lowest validation MSE among runs with a positive coefficient.
    const CoefficientRun& best_regularized() const;
};

/// Data, initialization and mini-batch order all derive from `seed`.
/// Single-task baselines are skipped when `with_stl` is false.
BenchmarkSeedResult run_planted_benchmark(const PlantedBenchmark& bench, std::uint64_t seed,
                                          bool with_stl = true);

} // namespace taan
