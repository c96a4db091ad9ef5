#pragma once

// Experiment configuration and the subcommands of the `taan` executable.

#include "taan/data.hpp"
#include "taan/network.hpp"
#include "taan/training.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace taan::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kInvalid = 2;

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "taan_out";
    ArchitectureSpec arch;
    TrainConfig train;
    SyntheticSpec synthetic;
    std::optional<std::string> csv_dir; // task{t}_{split}.csv files; replaces synthetic data
    std::optional<std::string> checkpoint;
    long bound_samples = 1'000'000;

    /// Library defaults with the desk-scale architecture (two hidden layers of
    /// width 32, 16 basis functions) and learning rate 1e-3.
    static ExperimentConfig defaults();

    /// Sets the seed of data generation, initialization and training.
    void apply_seed(std::uint64_t s);

    /// Input/output widths and task count follow the synthetic spec unless CSV
    /// data is configured.
    ArchitectureSpec resolved_architecture() const;

    void validate() const;
};

/// Missing keys keep their defaults. Throws InvalidArgument on bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

int cmd_gen_data(const ExperimentConfig& config, std::ostream& out);
int cmd_train(const ExperimentConfig& config, std::ostream& out);
int cmd_analyze(const ExperimentConfig& config, std::ostream& out);
int cmd_check(const std::string& kind, const ExperimentConfig& config, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace taan::cli
