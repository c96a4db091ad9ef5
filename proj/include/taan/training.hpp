#pragma once

#include "taan/data.hpp"
#include "taan/metrics.hpp"
#include "taan/network.hpp"
#include "taan/regularizers.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace taan {

enum class LossKind { SquaredError, CrossEntropy };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

/// Mean over the batch of the per-sample loss. Squared error sums over
/// output columns; cross-entropy applies a softmax to the outputs and
/// normalises each target row to a distribution (all-zero rows are ignored).
/// When `grad` is non-null it receives dLoss/dOutputs.
double task_loss(LossKind kind, const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets,
                 Eigen::MatrixXd* grad = nullptr);

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    ParameterSet first_moment;
    ParameterSet second_moment;
    long step = 0;

    static AdamState init_like(const ParameterSet& params, const AdamConfig& config);
};

/// One bias-corrected Adam update of every tensor in `params`.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state);

enum class EvalMetric { Mse, Accuracy, MapAtK };

std::string_view to_string(EvalMetric metric);
EvalMetric parse_eval_metric(std::string_view name);

/// Mean squared error over all entries; accuracy by argmax (or a 0.5
/// threshold for single-column targets); mean average precision truncated
/// at k over examples with at least one positive label.
double evaluate(const TaanModel& model, const TaskDataset& dataset, int task, EvalMetric metric,
                int k = 10);

/// Metric on precomputed scores; used by evaluate.
double score_predictions(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& targets,
                         EvalMetric metric, int k = 10);

struct TrainConfig {
    AdamConfig adam;
    int batch_size = 32; // per task and step
    int epochs = 10;
    std::uint64_t seed = 0;
    RegConfig reg;
    std::vector<LossKind> loss_kinds; // per task; empty means squared error everywhere
    EvalMetric val_metric = EvalMetric::Mse;
    int map_k = 10;
    GaussianMixture mixture = GaussianMixture::standard_normal();

    void validate() const;
    LossKind loss_for(int task) const;
};

struct MultiTaskData {
    std::vector<TaskDataset> train; // indexed by task
    std::vector<TaskDataset> val;   // empty, or indexed by task
};

struct HistoryRow {
    int epoch = 0;
    int task_id = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
    double reg_value = 0.0;
    int layer_id = 0;
    double mean_pairwise_distance = 0.0;
};

struct TrainingHistory {
    std::vector<HistoryRow> rows;

    void write_csv(std::ostream& out) const;
    std::string to_csv() const;

    /// Mean pairwise distance of `layer` at `epoch`, or of the last epoch when
    /// epoch < 0.
    double mean_pairwise_distance(int layer, int epoch = -1) const;
    double train_loss_total(int epoch) const;
};

struct TrainResult {
    TaanModel model;
    TrainingHistory history;
};

/// Mean off-diagonal entry of the layer's distance matrix (0 when T = 1).
double mean_pairwise_distance(const Eigen::MatrixXd& alpha, const GramCache& cache);

/// Fixed-epoch Adam training of the composite objective
///   sum_t L_t + c * sum_l L_reg(alpha_l).
/// Each step draws one mini-batch per task. History row epoch 0 describes the
/// untrained model; epoch e describes the model after e passes.
TrainResult train(const TaanModel& model, const MultiTaskData& data, const TrainConfig& config);

} // namespace taan
