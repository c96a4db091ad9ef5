#include "taan/cli.hpp"

#include "taan/analysis.hpp"
#include "taan/checkpoint.hpp"
#include "taan/checks.hpp"
#include "taan/errors.hpp"
#include "taan/format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace taan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig config;
    config.arch.hidden_widths = {32, 32};
    config.arch.basis_count = 16;
    config.train.adam.learning_rate = 1e-3;
    config.train.epochs = 20;
    return config;
}

void ExperimentConfig::apply_seed(std::uint64_t s) {
    seed = s;
    train.seed = s;
    synthetic.seed = s;
}

ArchitectureSpec ExperimentConfig::resolved_architecture() const {
    ArchitectureSpec a = arch;
    if (!csv_dir) {
        a.input_dim = synthetic.input_dim;
        a.output_dim = 1;
        a.task_count = synthetic.task_count;
    }
    return a;
}

void ExperimentConfig::validate() const {
    resolved_architecture().validate();
    train.validate();
    if (!csv_dir) {
        synthetic.validate();
    }
    if (bound_samples < 2) {
        throw InvalidArgument("check.bound_samples must be >= 2");
    }
}

namespace {

template <class T>
void read(const json& j, const char* key, T& target) {
    if (j.contains(key)) {
        target = j.at(key).get<T>();
    }
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c = ExperimentConfig::defaults();
    try {
        if (j.contains("seed")) c.apply_seed(j.at("seed").get<std::uint64_t>());
        read(j, "out", c.out_dir);
        if (j.contains("checkpoint")) c.checkpoint = j.at("checkpoint").get<std::string>();
        if (j.contains("architecture")) {
            const auto& a = j.at("architecture");
            read(a, "input_dim", c.arch.input_dim);
            read(a, "hidden_widths", c.arch.hidden_widths);
            read(a, "output_dim", c.arch.output_dim);
            read(a, "task_count", c.arch.task_count);
            read(a, "basis_count", c.arch.basis_count);
            read(a, "grid_lo", c.arch.grid_lo);
            read(a, "grid_hi", c.arch.grid_hi);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            read(t, "learning_rate", c.train.adam.learning_rate);
            read(t, "beta1", c.train.adam.beta1);
            read(t, "beta2", c.train.adam.beta2);
            read(t, "epsilon", c.train.adam.epsilon);
            read(t, "batch_size", c.train.batch_size);
            read(t, "epochs", c.train.epochs);
            read(t, "map_k", c.train.map_k);
            if (t.contains("reg")) c.train.reg.kind = parse_regularizer_kind(t.at("reg").get<std::string>());
            read(t, "coef", c.train.reg.coefficient);
            if (t.contains("val_metric")) c.train.val_metric = parse_eval_metric(t.at("val_metric").get<std::string>());
            if (t.contains("loss")) {
                const auto& loss = t.at("loss");
                c.train.loss_kinds.clear();
                if (loss.is_string()) {
                    c.train.loss_kinds.push_back(parse_loss_kind(loss.get<std::string>()));
                } else {
                    for (const auto& k : loss) c.train.loss_kinds.push_back(parse_loss_kind(k.get<std::string>()));
                }
            }
        }
        if (j.contains("mixture")) c.train.mixture = mixture_from_json(j.at("mixture"));
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("csv_dir")) c.csv_dir = d.at("csv_dir").get<std::string>();
            if (d.contains("synthetic")) {
                const auto& s = d.at("synthetic");
                read(s, "task_count", c.synthetic.task_count);
                read(s, "samples_per_task", c.synthetic.samples_per_task);
                read(s, "input_dim", c.synthetic.input_dim);
                read(s, "relatedness", c.synthetic.relatedness);
                read(s, "noise", c.synthetic.noise);
                read(s, "hidden", c.synthetic.hidden);
                read(s, "train_fraction", c.synthetic.train_fraction);
                read(s, "val_fraction", c.synthetic.val_fraction);
                read(s, "clusters", c.synthetic.clusters);
                if (s.contains("cluster_count")) {
                    c.synthetic.clusters = SyntheticSpec::block_clusters(
                        c.synthetic.task_count, s.at("cluster_count").get<int>());
                }
                if (s.contains("seed")) c.synthetic.seed = s.at("seed").get<std::uint64_t>();
            }
        }
        if (j.contains("check")) read(j.at("check"), "bound_samples", c.bound_samples);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad config value: ") + e.what());
    }
    // A single loss kind applies to every task.
    if (c.train.loss_kinds.size() == 1) {
        c.train.loss_kinds.assign(static_cast<std::size_t>(c.resolved_architecture().task_count),
                                  c.train.loss_kinds.front());
    }
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json loss = json::array();
    for (auto k : c.train.loss_kinds) loss.push_back(std::string(to_string(k)));
    json data;
    if (c.csv_dir) {
        data["csv_dir"] = *c.csv_dir;
    } else {
        data["synthetic"] = {{"task_count", c.synthetic.task_count},
                             {"samples_per_task", c.synthetic.samples_per_task},
                             {"input_dim", c.synthetic.input_dim},
                             {"clusters", c.synthetic.clusters},
                             {"relatedness", c.synthetic.relatedness},
                             {"noise", c.synthetic.noise},
                             {"hidden", c.synthetic.hidden},
                             {"train_fraction", c.synthetic.train_fraction},
                             {"val_fraction", c.synthetic.val_fraction},
                             {"seed", c.synthetic.seed}};
    }
    return {{"seed", c.seed},
            {"out", c.out_dir},
            {"architecture", architecture_to_json(c.arch)},
            {"train",
             {{"learning_rate", c.train.adam.learning_rate},
              {"beta1", c.train.adam.beta1},
              {"beta2", c.train.adam.beta2},
              {"epsilon", c.train.adam.epsilon},
              {"batch_size", c.train.batch_size},
              {"epochs", c.train.epochs},
              {"map_k", c.train.map_k},
              {"reg", std::string(to_string(c.train.reg.kind))},
              {"coef", c.train.reg.coefficient},
              {"val_metric", std::string(to_string(c.train.val_metric))},
              {"loss", loss}}},
            {"mixture", mixture_to_json(c.train.mixture)},
            {"data", data},
            {"check", {{"bound_samples", c.bound_samples}}}};
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
    }
    return config_from_json(j);
}

namespace {

fs::path subdir(const ExperimentConfig& c, const char* name) {
    fs::path p = fs::path(c.out_dir) / name;
    fs::create_directories(p);
    return p;
}

std::string data_file(int task, Split split) {
    return "task" + std::to_string(task) + "_" + std::string(to_string(split)) + ".csv";
}

std::vector<TaskDataset> load_all(const ExperimentConfig& c) {
    if (!c.csv_dir) {
        return generate(c.synthetic);
    }
    const auto arch = c.resolved_architecture();
    std::vector<TaskDataset> all;
    for (int t = 0; t < arch.task_count; ++t) {
        for (Split s : {Split::Train, Split::Val, Split::Test}) {
            const fs::path path = fs::path(*c.csv_dir) / data_file(t, s);
            if (s != Split::Train && !fs::exists(path)) continue;
            all.push_back(load_csv(path.string(), {arch.input_dim, arch.output_dim, t, s}));
        }
    }
    return all;
}

} // namespace

int cmd_gen_data(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const fs::path dir = subdir(config, "data");
    long rows = 0;
    for (const auto& d : generate(config.synthetic)) {
        write_csv(d, (dir / data_file(d.task, d.split)).string());
        rows += d.size();
    }
    out << "wrote " << rows << " samples for " << config.synthetic.task_count << " tasks to "
        << dir.string() << '\n';
    return kOk;
}

int cmd_train(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto all = load_all(config);
    MultiTaskData data{select_split(all, Split::Train), select_split(all, Split::Val)};
    const TaanModel initial = build_model(config.resolved_architecture(), config.seed);
    const TrainResult result = train(initial, data, config.train);

    const fs::path checkpoint = subdir(config, "checkpoints") / "model.json";
    save_checkpoint({result.model, config.train.mixture}, checkpoint.string());
    const fs::path history = subdir(config, "history") / "history.csv";
    {
        std::ofstream h(history);
        result.history.write_csv(h);
        if (!h) throw IoError("failed writing '" + history.string() + "'");
    }

    const auto test = select_split(all, Split::Test);
    if (!test.empty()) {
        const fs::path report = subdir(config, "reports") / "evaluation.csv";
        std::ofstream r(report);
        r << "task_id,metric,value\n";
        for (const auto& d : test) {
            if (d.size() == 0) continue;
            r << d.task << ',' << to_string(config.train.val_metric) << ','
              << format_real(evaluate(result.model, d, d.task, config.train.val_metric, config.train.map_k))
              << '\n';
        }
    }
    const int last = config.train.epochs;
    out << "trained " << last << " epochs; total train loss " << result.history.train_loss_total(0)
        << " -> " << result.history.train_loss_total(last) << '\n';
    out << "checkpoint: " << checkpoint.string() << "\nhistory: " << history.string() << '\n';
    return kOk;
}

int cmd_analyze(const ExperimentConfig& config, std::ostream& out) {
    const std::string path = config.checkpoint
                                 ? *config.checkpoint
                                 : (fs::path(config.out_dir) / "checkpoints" / "model.json").string();
    const Checkpoint checkpoint = load_checkpoint(path);
    const GramCache cache = build_gram(checkpoint.model.grid(), checkpoint.mixture);
    const fs::path dir = subdir(config, "matrices");
    for (const auto& report : layer_distances(checkpoint.model, cache)) {
        const std::string stem = "layer" + std::to_string(report.layer);
        export_heatmap(report, (dir / (stem + ".csv")).string(), HeatmapFormat::Csv);
        export_heatmap(report, (dir / (stem + ".pgm")).string(), HeatmapFormat::Pgm);
        const Eigen::Index t = report.distances.rows();
        const double mean = t > 1 ? report.distances.sum() / static_cast<double>(t * (t - 1)) : 0.0;
        out << stem << ": mean pairwise distance " << mean << ", max " << report.distances.maxCoeff()
            << '\n';
    }
    out << "matrices: " << dir.string() << '\n';
    return kOk;
}

int cmd_check(const std::string& kind, const ExperimentConfig& config, std::ostream& out) {
    const fs::path dir = subdir(config, "reports");
    std::ofstream report(dir / ("check_" + kind + ".txt"));
    auto emit = [&](auto&& write) {
        write(out);
        write(report);
    };
    bool ok = false;
    if (kind == "moments") {
        const auto suites = checks::moment_suites(config.seed);
        emit([&](std::ostream& o) { checks::print(suites, o); });
        ok = checks::all_passed(suites);
    } else if (kind == "gradients") {
        const auto suites = checks::gradient_suites(config.seed);
        emit([&](std::ostream& o) { checks::print(suites, o); });
        ok = checks::all_passed(suites);
    } else if (kind == "bounds") {
        const auto result = checks::exact_gaussian_bound_check(config.seed, config.bound_samples);
        emit([&](std::ostream& o) { result.write_text(o); });
        std::ofstream csv(dir / "check_bounds.csv");
        result.write_csv(csv);
        ok = result.passed();
    } else {
        throw InvalidArgument("unknown check '" + kind + "' (expected moments, gradients or bounds)");
    }
    emit([&](std::ostream& o) { o << (ok ? "check passed\n" : "check FAILED\n"); });
    return ok ? kOk : kCheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Task adaptive activation networks: data generation, training, analysis and checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> reg;
    std::optional<double> coef;
    std::optional<int> epochs;
    std::optional<std::string> checkpoint;
    std::string check_kind;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Seed for data, initialization and training");
        sub->add_option("--out", out_dir, "Output directory");
    };
    auto* gen = app.add_subcommand("gen-data", "Write the synthetic benchmark as CSV files");
    add_common(gen);
    auto* tr = app.add_subcommand("train", "Train a model, write checkpoint and history");
    add_common(tr);
    tr->add_option("--reg", reg, "Regularizer")->check(CLI::IsMember({"none", "trace", "cos", "dis"}));
    tr->add_option("--coef", coef, "Regularization coefficient");
    tr->add_option("--epochs", epochs, "Number of epochs");
    auto* an = app.add_subcommand("analyze", "Per-layer task distance matrices and heatmaps");
    add_common(an);
    an->add_option("--checkpoint", checkpoint, "Checkpoint (default <out>/checkpoints/model.json)");
    auto* ch = app.add_subcommand("check", "Run a verification suite");
    add_common(ch);
    ch->add_option("kind", check_kind, "moments, gradients or bounds")
        ->required()
        ->check(CLI::IsMember({"moments", "gradients", "bounds"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kInvalid;
    }

    try {
        ExperimentConfig config = config_path.empty() ? ExperimentConfig::defaults() : load_config(config_path);
        if (seed) config.apply_seed(*seed);
        if (out_dir) config.out_dir = *out_dir;
        if (reg) config.train.reg.kind = parse_regularizer_kind(*reg);
        if (coef) config.train.reg.coefficient = *coef;
        if (epochs) config.train.epochs = *epochs;
        if (checkpoint) config.checkpoint = *checkpoint;

        if (gen->parsed()) return cmd_gen_data(config, out);
        if (tr->parsed()) return cmd_train(config, out);
        if (an->parsed()) return cmd_analyze(config, out);
        return cmd_check(check_kind, config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    }
}

} // namespace taan::cli
