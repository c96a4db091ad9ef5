#include "taan/training.hpp"

#include "taan/errors.hpp"
#include "taan/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace taan {

std::string_view to_string(LossKind kind) {
    return kind == LossKind::SquaredError ? "squared_error" : "cross_entropy";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "squared_error" || name == "mse") return LossKind::SquaredError;
    if (name == "cross_entropy" || name == "ce") return LossKind::CrossEntropy;
    throw InvalidArgument("unknown loss kind '" + std::string(name) + "'");
}

std::string_view to_string(EvalMetric metric) {
    switch (metric) {
    case EvalMetric::Mse:
        return "mse";
    case EvalMetric::Accuracy:
        return "accuracy";
    case EvalMetric::MapAtK:
        return "map_at_k";
    }
    return "mse";
}

EvalMetric parse_eval_metric(std::string_view name) {
    if (name == "mse") return EvalMetric::Mse;
    if (name == "accuracy") return EvalMetric::Accuracy;
    if (name == "map_at_k" || name == "map") return EvalMetric::MapAtK;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

double task_loss(LossKind kind, const Eigen::MatrixXd& outputs, const Eigen::MatrixXd& targets,
                 Eigen::MatrixXd* grad) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
        throw ShapeError("outputs and targets differ in shape");
    }
    const Eigen::Index n = outputs.rows();
    if (n == 0) {
        throw EmptyDatasetError("loss of an empty batch");
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (kind == LossKind::SquaredError) {
        const Eigen::MatrixXd diff = outputs - targets;
        if (grad) {
            *grad = (2.0 * inv_n) * diff;
        }
        return diff.squaredNorm() * inv_n;
    }

    double loss = 0.0;
    if (grad) {
        grad->setZero(outputs.rows(), outputs.cols());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mass = targets.row(i).sum();
        if (mass <= 0.0) {
            continue;
        }
        const double top = outputs.row(i).maxCoeff();
        const Eigen::RowVectorXd shifted = outputs.row(i).array() - top;
        const double log_z = std::log(shifted.array().exp().sum());
        const Eigen::RowVectorXd log_p = shifted.array() - log_z;
        const Eigen::RowVectorXd q = targets.row(i) / mass;
        loss -= q.dot(log_p);
        if (grad) {
            grad->row(i) = inv_n * (log_p.array().exp().matrix() - q);
        }
    }
    return loss * inv_n;
}

AdamState AdamState::init_like(const ParameterSet& params, const AdamConfig& config) {
    AdamState state;
    state.config = config;
    state.first_moment = params.zeros_like();
    state.second_moment = params.zeros_like();
    return state;
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
        !params.same_shape(state.second_moment)) {
        throw ShapeError("Adam state, gradients and parameters differ in shape");
    }
    const auto& cfg = state.config;
    ++state.step;
    const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    zip_tensors(
        [&](auto& p, const auto& g, auto& m, auto& v) {
            m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * g.array();
            v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square();
            p.array() -= cfg.learning_rate * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + cfg.epsilon);
        },
        params, grads, state.first_moment, state.second_moment);
}

double score_predictions(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& targets,
                         EvalMetric metric, int k) {
    if (scores.rows() != targets.rows() || scores.cols() != targets.cols()) {
        throw ShapeError("scores and targets differ in shape");
    }
    const Eigen::Index n = scores.rows();
    if (n == 0) {
        throw EmptyDatasetError("cannot evaluate an empty dataset");
    }
    switch (metric) {
    case EvalMetric::Mse:
        return (scores - targets).squaredNorm() / static_cast<double>(scores.size());
    case EvalMetric::Accuracy: {
        Eigen::Index correct = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (scores.cols() == 1) {
                correct += (scores(i, 0) >= 0.5) == (targets(i, 0) >= 0.5);
            } else {
                Eigen::Index predicted = 0;
                Eigen::Index actual = 0;
                scores.row(i).maxCoeff(&predicted);
                targets.row(i).maxCoeff(&actual);
                correct += predicted == actual;
            }
        }
        return static_cast<double>(correct) / static_cast<double>(n);
    }
    case EvalMetric::MapAtK: {
        if (k < 1) {
            throw InvalidArgument("map_at_k needs k >= 1");
        }
        double total = 0.0;
        Eigen::Index counted = 0;
        std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.cols()));
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto relevant = static_cast<Eigen::Index>((targets.row(i).array() > 0.5).count());
            if (relevant == 0) {
                continue;
            }
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            // Ties keep label order.
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return scores(i, a) > scores(i, b);
            });
            const Eigen::Index depth = std::min<Eigen::Index>(k, scores.cols());
            double hits = 0.0;
            double precision_sum = 0.0;
            for (Eigen::Index r = 0; r < depth; ++r) {
                if (targets(i, order[static_cast<std::size_t>(r)]) > 0.5) {
                    hits += 1.0;
                    precision_sum += hits / static_cast<double>(r + 1);
                }
            }
            total += precision_sum / static_cast<double>(std::min<Eigen::Index>(relevant, k));
            ++counted;
        }
        if (counted == 0) {
            throw EmptyDatasetError("no example has a positive label");
        }
        return total / static_cast<double>(counted);
    }
    }
    return 0.0;
}

double evaluate(const TaanModel& model, const TaskDataset& dataset, int task, EvalMetric metric,
                int k) {
    if (dataset.size() == 0) {
        throw EmptyDatasetError("cannot evaluate an empty dataset");
    }
    const auto result = forward(model, task, dataset.inputs);
    return score_predictions(result.outputs, dataset.targets, metric, k);
}

void TrainConfig::validate() const {
    if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
        throw InvalidArgument("learning rate must be positive");
    }
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw InvalidArgument("Adam betas must lie in [0, 1)");
    }
    if (!(adam.epsilon > 0.0)) {
        throw InvalidArgument("Adam epsilon must be positive");
    }
    if (batch_size < 1) {
        throw InvalidArgument("batch size must be >= 1");
    }
    if (epochs < 0) {
        throw InvalidArgument("epochs must be >= 0");
    }
    if (map_k < 1) {
        throw InvalidArgument("map_k must be >= 1");
    }
    reg.validate();
}

LossKind TrainConfig::loss_for(int task) const {
    if (loss_kinds.empty()) {
        return LossKind::SquaredError;
    }
    if (task < 0 || static_cast<std::size_t>(task) >= loss_kinds.size()) {
        throw ShapeError("no loss kind configured for task " + std::to_string(task));
    }
    return loss_kinds[static_cast<std::size_t>(task)];
}

void TrainingHistory::write_csv(std::ostream& out) const {
    out << "epoch,task_id,train_loss,val_metric,reg_value,layer_id,mean_pairwise_distance\n";
    for (const auto& r : rows) {
        out << r.epoch << ',' << r.task_id << ',' << format_real(r.train_loss) << ','
            << format_real(r.val_metric) << ',' << format_real(r.reg_value) << ',' << r.layer_id
            << ',' << format_real(r.mean_pairwise_distance) << '\n';
    }
}

std::string TrainingHistory::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

double TrainingHistory::mean_pairwise_distance(int layer, int epoch) const {
    if (rows.empty()) {
        throw InvalidArgument("empty history");
    }
    const int target = epoch < 0 ? rows.back().epoch : epoch;
    for (const auto& r : rows) {
        if (r.epoch == target && r.layer_id == layer) {
            return r.mean_pairwise_distance;
        }
    }
    throw InvalidArgument("history has no row for layer " + std::to_string(layer) + " at epoch " +
                          std::to_string(target));
}

double TrainingHistory::train_loss_total(int epoch) const {
    double total = 0.0;
    bool found = false;
    for (const auto& r : rows) {
        if (r.epoch == epoch && r.layer_id == 0) {
            total += r.train_loss;
            found = true;
        }
    }
    if (!found) {
        throw InvalidArgument("history has no rows for epoch " + std::to_string(epoch));
    }
    return total;
}

double mean_pairwise_distance(const Eigen::MatrixXd& alpha, const GramCache& cache) {
    const Eigen::Index t = alpha.rows();
    if (t < 2) {
        return 0.0;
    }
    return distance_matrix(alpha, cache).sum() / static_cast<double>(t * (t - 1));
}

namespace {

void check_data(const TaanModel& model, const MultiTaskData& data, const TrainConfig& config) {
    const auto t = static_cast<std::size_t>(model.task_count());
    if (data.train.size() != t) {
        throw ShapeError("expected training data for " + std::to_string(t) + " tasks, got " +
                         std::to_string(data.train.size()));
    }
    if (!data.val.empty() && data.val.size() != t) {
        throw ShapeError("validation data must be empty or cover every task");
    }
    auto check = [&](const TaskDataset& d, std::size_t task, bool allow_empty) {
        d.validate();
        if (d.size() == 0 && !allow_empty) {
            throw EmptyDatasetError("task " + std::to_string(task) + " has no training samples");
        }
        if (d.inputs.cols() != model.arch().input_dim || d.targets.cols() != model.arch().output_dim) {
            throw ShapeError("task " + std::to_string(task) + " data width does not match the model");
        }
    };
    for (std::size_t i = 0; i < t; ++i) {
        check(data.train[i], i, false);
        if (!data.val.empty()) {
            check(data.val[i], i, true);
        }
        config.loss_for(static_cast<int>(i));
    }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx, std::size_t begin,
                            std::size_t count) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), m.cols());
    for (std::size_t r = 0; r < count; ++r) {
        out.row(static_cast<Eigen::Index>(r)) = m.row(idx[begin + r]);
    }
    return out;
}

void record_epoch(int epoch, const TaanModel& model, const MultiTaskData& data,
                  const TrainConfig& config, const GramCache& cache, TrainingHistory& history) {
    const int depth = model.depth();
    std::vector<double> reg(static_cast<std::size_t>(depth));
    std::vector<double> mpd(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
        const auto& alpha = model.params().alphas[static_cast<std::size_t>(l)];
        reg[static_cast<std::size_t>(l)] = reg_value(config.reg.kind, alpha, cache);
        mpd[static_cast<std::size_t>(l)] = mean_pairwise_distance(alpha, cache);
    }
    for (int t = 0; t < model.task_count(); ++t) {
        const auto& train = data.train[static_cast<std::size_t>(t)];
        const double loss = task_loss(config.loss_for(t), forward(model, t, train.inputs).outputs,
                                      train.targets);
        double val = std::numeric_limits<double>::quiet_NaN();
        if (!data.val.empty() && data.val[static_cast<std::size_t>(t)].size() > 0) {
            val = evaluate(model, data.val[static_cast<std::size_t>(t)], t, config.val_metric,
                           config.map_k);
        }
        for (int l = 0; l < depth; ++l) {
            history.rows.push_back({epoch, t, loss, val, reg[static_cast<std::size_t>(l)], l,
                                    mpd[static_cast<std::size_t>(l)]});
        }
    }
}

} // namespace

TrainResult train(const TaanModel& model, const MultiTaskData& data, const TrainConfig& config) {
    config.validate();
    check_data(model, data, config);

    TrainResult result{model, {}};
    TaanModel& current = result.model;
    const GramCache cache = build_gram(current.grid(), config.mixture);
    const int tasks = current.task_count();
    const auto batch = static_cast<std::size_t>(config.batch_size);

    std::mt19937_64 rng(config.seed);
    std::vector<std::vector<int>> order(static_cast<std::size_t>(tasks));
    std::size_t largest = 0;
    for (int t = 0; t < tasks; ++t) {
        auto& o = order[static_cast<std::size_t>(t)];
        o.resize(static_cast<std::size_t>(data.train[static_cast<std::size_t>(t)].size()));
        std::iota(o.begin(), o.end(), 0);
        largest = std::max(largest, o.size());
    }
    const std::size_t steps_per_epoch = (largest + batch - 1) / batch;

    AdamState adam = AdamState::init_like(current.params(), config.adam);
    ParameterSet grads = current.params().zeros_like();
    Eigen::MatrixXd output_grad;

    record_epoch(0, current, data, config, cache, result.history);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (auto& o : order) {
            std::shuffle(o.begin(), o.end(), rng);
        }
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            grads.set_zero();
            for (int t = 0; t < tasks; ++t) {
                const auto& o = order[static_cast<std::size_t>(t)];
                const auto& train = data.train[static_cast<std::size_t>(t)];
                const std::size_t begin = (step * batch) % o.size();
                const std::size_t count = std::min(batch, o.size() - begin);
                const Eigen::MatrixXd x = gather_rows(train.inputs, o, begin, count);
                const Eigen::MatrixXd y = gather_rows(train.targets, o, begin, count);
                const auto fwd = forward(current, t, x);
                task_loss(config.loss_for(t), fwd.outputs, y, &output_grad);
                backward_accumulate(current, fwd.trace, output_grad, grads);
            }
            if (config.reg.kind != RegularizerKind::None && config.reg.coefficient != 0.0) {
                for (std::size_t l = 0; l < grads.alphas.size(); ++l) {
                    grads.alphas[l] += config.reg.coefficient *
                                       reg_grad(config.reg.kind, current.params().alphas[l], cache);
                }
            }
            adam_step(current.params(), grads, adam);
        }
        record_epoch(epoch, current, data, config, cache, result.history);
    }
    return result;
}

} // namespace taan
