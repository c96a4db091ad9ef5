#include "taan/benchmark.hpp"

#include "taan/errors.hpp"
#include "taan/metrics.hpp"

#include <limits>

namespace taan {

namespace {

constexpr std::uint64_t kModelOffset = 1000;
constexpr std::uint64_t kTrainOffset = 2000;
constexpr std::uint64_t kStlOffset = 3000;

double mean_mse(const TaanModel& model, const std::vector<TaskDataset>& sets) {
    double total = 0.0;
    for (const auto& d : sets) {
        total += evaluate(model, d, d.task, EvalMetric::Mse);
    }
    return total / static_cast<double>(sets.size());
}

TaskDataset as_single_task(TaskDataset d) {
    d.task = 0;
    return d;
}

} // namespace

PlantedBenchmark PlantedBenchmark::defaults() {
    PlantedBenchmark b;
    b.data.task_count = 8;
    b.data.samples_per_task = 1000;
    b.data.input_dim = 8;
    b.data.clusters = SyntheticSpec::block_clusters(8, 2);
    b.data.relatedness = 0.3;
    b.data.noise = 0.1;
    b.train.adam.learning_rate = 1e-3;
    b.train.epochs = 100;
    b.train.batch_size = 32;
    return b;
}

ArchitectureSpec PlantedBenchmark::architecture(int task_count) const {
    ArchitectureSpec a;
    a.input_dim = data.input_dim;
    a.hidden_widths = hidden_widths;
    a.output_dim = 1;
    a.task_count = task_count;
    a.basis_count = basis_count;
    return a;
}

const CoefficientRun& BenchmarkSeedResult::unregularized() const {
    for (const auto& r : runs) {
        if (r.coefficient == 0.0) return r;
    }
    throw InvalidArgument("benchmark has no unregularized run");
}

const CoefficientRun& BenchmarkSeedResult::best_regularized() const {
    const CoefficientRun* best = nullptr;
    for (const auto& r : runs) {
        if (r.coefficient > 0.0 && (best == nullptr || r.val_mse < best->val_mse)) best = &r;
    }
    if (best == nullptr) throw InvalidArgument("benchmark has no regularized run");
    return *best;
}

BenchmarkSeedResult run_planted_benchmark(const PlantedBenchmark& bench, std::uint64_t seed,
                                          bool with_stl) {
    SyntheticSpec spec = bench.data;
    spec.seed = seed;
    const auto all = generate(spec);
    const MultiTaskData data{select_split(all, Split::Train), select_split(all, Split::Val)};
    const auto test = select_split(all, Split::Test);

    BenchmarkSeedResult result;
    result.seed = seed;
    const TaanModel initial = build_model(bench.architecture(spec.task_count), seed + kModelOffset);
    const GramCache cache = build_gram(initial.grid(), bench.train.mixture);
    TrainConfig cfg = bench.train;
    cfg.seed = seed + kTrainOffset;
    for (double c : bench.coefficients) {
        cfg.reg = {bench.kind, c};
        auto trained = train(initial, data, cfg);
        CoefficientRun run;
        run.coefficient = c;
        run.test_mse = mean_mse(trained.model, test);
        run.val_mse = mean_mse(trained.model, data.val);
        for (int l = 0; l < trained.model.depth(); ++l) {
            run.mean_pairwise_distance += trained.history.mean_pairwise_distance(l);
        }
        run.mean_pairwise_distance /= trained.model.depth();
        run.last_layer =
            cluster_separation(layer_distances(trained.model, cache).back().distances, spec.clusters);
        run.history = std::move(trained.history);
        result.runs.push_back(std::move(run));
    }

    if (with_stl) {
        TrainConfig single = bench.train;
        single.seed = seed + kTrainOffset;
        double total = 0.0;
        for (int t = 0; t < spec.task_count; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            const TaanModel m = build_model(bench.architecture(1), seed + kStlOffset + ut);
            const MultiTaskData one{{as_single_task(data.train[ut])}, {as_single_task(data.val[ut])}};
            const auto trained = train(m, one, single);
            total += evaluate(trained.model, as_single_task(test[ut]), 0, EvalMetric::Mse);
        }
        result.stl_test_mse = total / spec.task_count;
    }
    return result;
}

} // namespace taan
