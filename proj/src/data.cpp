#include "taan/data.hpp"

#include "taan/errors.hpp"
#include "taan/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace taan {

std::string_view to_string(Split split) {
    switch (split) {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

void TaskDataset::validate() const {
    if (inputs.rows() != targets.rows()) {
        throw ShapeError("inputs and targets have different row counts");
    }
    if (!sample_ids.empty() && static_cast<Eigen::Index>(sample_ids.size()) != inputs.rows()) {
        throw ShapeError("sample id count does not match row count");
    }
    if (!inputs.allFinite() || !targets.allFinite()) {
        throw InvalidArgument("dataset contains non-finite values");
    }
}

std::vector<int> SyntheticSpec::block_clusters(int task_count, int cluster_count) {
    if (task_count < 1 || cluster_count < 1 || cluster_count > task_count) {
        throw InvalidArgument("need 1 <= cluster_count <= task_count");
    }
    std::vector<int> out(static_cast<std::size_t>(task_count));
    for (int t = 0; t < task_count; ++t) {
        out[static_cast<std::size_t>(t)] = t * cluster_count / task_count;
    }
    return out;
}

void SyntheticSpec::validate() const {
    if (task_count < 1) throw InvalidArgument("task_count must be >= 1");
    if (samples_per_task < 1) throw InvalidArgument("samples_per_task must be >= 1");
    if (input_dim < 1) throw InvalidArgument("input_dim must be >= 1");
    if (hidden < 1) throw InvalidArgument("hidden must be >= 1");
    if (!(relatedness >= 0.0 && relatedness <= 1.0)) {
        throw InvalidArgument("relatedness must lie in [0, 1]");
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        throw InvalidArgument("noise must be finite and >= 0");
    }
    if (!(train_fraction > 0.0) || !(val_fraction >= 0.0) ||
        !(train_fraction + val_fraction <= 1.0)) {
        throw InvalidArgument("split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
    }
    if (!clusters.empty() && static_cast<int>(clusters.size()) != task_count) {
        throw InvalidArgument("cluster assignment must list one cluster per task");
    }
    for (int c : clusters) {
        if (c < 0) throw InvalidArgument("cluster ids must be >= 0");
    }
}

int SyntheticSpec::cluster_of(int task) const {
    return clusters.empty() ? 0 : clusters[static_cast<std::size_t>(task)];
}

namespace {

// Independent generator per (seed, purpose, index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index)};
    return std::mt19937_64(seq);
}

constexpr std::uint64_t kClusterStream = 1;
constexpr std::uint64_t kTaskStream = 2;
constexpr std::uint64_t kSampleStream = 3;
constexpr std::uint64_t kCalibrationStream = 4;
constexpr int kCalibrationSamples = 20000;
constexpr double kClusterFrequency = 1.5;
// Task maps oscillate fast enough that independent draws are nearly
// uncorrelated under standard-normal inputs.
constexpr double kTaskFrequency = 2.5;

Eigen::MatrixXd standard_normal_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            x(r, c) = normal(rng);
        }
    }
    return x;
}

} // namespace

Eigen::VectorXd SyntheticTasks::RandomMap::eval(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd hidden = x * W.transpose();
    hidden.rowwise() += b.transpose();
    if (periodic) {
        hidden = hidden.array().cos();
    } else {
        hidden = hidden.array().tanh();
    }
    return (hidden * v).array() - offset;
}

SyntheticTasks::RandomMap SyntheticTasks::draw_map(std::uint64_t stream, bool periodic) const {
    auto rng = stream_rng(spec_.seed, stream >> 32, stream & 0xffffffffu);
    std::normal_distribution<double> normal(0.0, 1.0);
    RandomMap map;
    map.periodic = periodic;
    const double w_scale = (periodic ? kTaskFrequency : kClusterFrequency) /
                           std::sqrt(static_cast<double>(spec_.input_dim));
    map.W.resize(spec_.hidden, spec_.input_dim);
    for (int r = 0; r < spec_.hidden; ++r) {
        for (int c = 0; c < spec_.input_dim; ++c) {
            map.W(r, c) = w_scale * normal(rng);
        }
    }
    map.b.resize(spec_.hidden);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int r = 0; r < spec_.hidden; ++r) map.b[r] = periodic ? phase(rng) : 0.5 * normal(rng);
    map.v.resize(spec_.hidden);
    for (int r = 0; r < spec_.hidden; ++r) map.v[r] = normal(rng);

    // Centre and scale to unit variance under standard-normal inputs.
    auto calib_rng = stream_rng(spec_.seed, kCalibrationStream, stream);
    const Eigen::MatrixXd probe = standard_normal_matrix(calib_rng, kCalibrationSamples, spec_.input_dim);
    const Eigen::VectorXd y = map.eval(probe);
    const double mean = y.mean();
    const double var = (y.array() - mean).square().mean();
    map.offset = mean;
    if (var > 0.0) {
        const double inv = 1.0 / std::sqrt(var);
        map.v *= inv;
        map.offset *= inv;
    }
    return map;
}

SyntheticTasks::SyntheticTasks(SyntheticSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    int cluster_count = 0;
    for (int t = 0; t < spec_.task_count; ++t) {
        cluster_count = std::max(cluster_count, spec_.cluster_of(t) + 1);
    }
    for (int c = 0; c < cluster_count; ++c) {
        cluster_maps_.push_back(draw_map((kClusterStream << 32) | static_cast<std::uint64_t>(c), false));
    }
    for (int t = 0; t < spec_.task_count; ++t) {
        task_maps_.push_back(draw_map((kTaskStream << 32) | static_cast<std::uint64_t>(t), true));
    }
}

Eigen::VectorXd SyntheticTasks::target(int task, const Eigen::MatrixXd& x) const {
    if (task < 0 || task >= spec_.task_count) {
        throw InvalidArgument("unknown task id " + std::to_string(task));
    }
    if (x.cols() != spec_.input_dim) {
        throw ShapeError("input width does not match synthetic spec");
    }
    const double delta = spec_.relatedness;
    const double shared = std::sqrt(std::max(0.0, 1.0 - delta * delta));
    Eigen::VectorXd y = shared * cluster_maps_[static_cast<std::size_t>(spec_.cluster_of(task))].eval(x);
    if (delta > 0.0) {
        y += delta * task_maps_[static_cast<std::size_t>(task)].eval(x);
    }
    return y;
}

std::vector<TaskDataset> SyntheticTasks::generate() const {
    const int n = spec_.samples_per_task;
    const int n_train = static_cast<int>(std::lround(spec_.train_fraction * n));
    const int n_val = std::min(n - n_train, static_cast<int>(std::lround(spec_.val_fraction * n)));
    const int bounds[4] = {0, n_train, n_train + n_val, n};
    const Split splits[3] = {Split::Train, Split::Val, Split::Test};

    std::vector<TaskDataset> out;
    for (int t = 0; t < spec_.task_count; ++t) {
        auto rng = stream_rng(spec_.seed, kSampleStream, static_cast<std::uint64_t>(t));
        const Eigen::MatrixXd x = standard_normal_matrix(rng, n, spec_.input_dim);
        Eigen::VectorXd y = target(t, x);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < n; ++i) {
            y[i] += spec_.noise * normal(rng);
        }
        for (int s = 0; s < 3; ++s) {
            TaskDataset d;
            const int lo = bounds[s];
            const int count = bounds[s + 1] - lo;
            d.inputs = x.middleRows(lo, count);
            d.targets = y.segment(lo, count);
            d.task = t;
            d.split = splits[s];
            d.sample_ids.resize(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i) d.sample_ids[static_cast<std::size_t>(i)] = lo + i;
            out.push_back(std::move(d));
        }
    }
    return out;
}

std::vector<TaskDataset> generate(const SyntheticSpec& spec) { return SyntheticTasks(spec).generate(); }

std::vector<TaskDataset> select_split(const std::vector<TaskDataset>& all, Split split) {
    std::vector<TaskDataset> out;
    for (const auto& d : all) {
        if (d.split == split) out.push_back(d);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const TaskDataset& a, const TaskDataset& b) { return a.task < b.task; });
    return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

TaskDataset read_csv(std::istream& in, const CsvSchema& schema) {
    if (schema.input_dim < 1 || schema.target_dim < 1) {
        throw InvalidArgument("CSV schema needs input_dim >= 1 and target_dim >= 1");
    }
    const int width = schema.input_dim + schema.target_dim;
    std::string line;
    long line_no = 0;

    // Header.
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            have_header = true;
            break;
        }
    }
    if (!have_header) {
        throw EmptyDatasetError("CSV input is empty");
    }
    const auto header = split_fields(trim(line));
    if (static_cast<int>(header.size()) != width) {
        throw ParseError("header has " + std::to_string(header.size()) + " columns, schema expects " +
                             std::to_string(width),
                         line_no);
    }
    for (int c = 0; c < width; ++c) {
        const std::string expected =
            c < schema.input_dim ? "x" + std::to_string(c) : "y" + std::to_string(c - schema.input_dim);
        if (trim(header[static_cast<std::size_t>(c)]) != expected) {
            throw ParseError("header column " + std::to_string(c) + " is '" +
                                 std::string(header[static_cast<std::size_t>(c)]) + "', expected '" +
                                 expected + "'",
                             line_no);
        }
    }

    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto fields = split_fields(row);
        if (static_cast<int>(fields.size()) != width) {
            throw ParseError("row has " + std::to_string(fields.size()) + " columns, expected " +
                                 std::to_string(width),
                             line_no);
        }
        for (const auto raw : fields) {
            const auto cell = trim(raw);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
                throw ParseError("cannot parse '" + std::string(cell) + "' as a number", line_no);
            }
            if (!std::isfinite(v)) {
                throw ParseError("non-finite value '" + std::string(cell) + "'", line_no);
            }
            values.push_back(v);
        }
    }
    const auto rows = static_cast<Eigen::Index>(values.size() / static_cast<std::size_t>(width));
    if (rows == 0) {
        throw EmptyDatasetError("CSV input has a header but no samples");
    }

    TaskDataset d;
    d.inputs.resize(rows, schema.input_dim);
    d.targets.resize(rows, schema.target_dim);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int c = 0; c < width; ++c) {
            const double v = values[static_cast<std::size_t>(r * width + c)];
            if (c < schema.input_dim) {
                d.inputs(r, c) = v;
            } else {
                d.targets(r, c - schema.input_dim) = v;
            }
        }
    }
    d.task = schema.task;
    d.split = schema.split;
    d.sample_ids.resize(static_cast<std::size_t>(rows));
    for (Eigen::Index r = 0; r < rows; ++r) d.sample_ids[static_cast<std::size_t>(r)] = static_cast<int>(r);
    return d;
}

TaskDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_csv(in, schema);
}

void write_csv(const TaskDataset& data, std::ostream& out) {
    data.validate();
    for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
        out << (c ? "," : "") << 'x' << c;
    }
    for (Eigen::Index c = 0; c < data.targets.cols(); ++c) {
        out << ",y" << c;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < data.size(); ++r) {
        for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
            out << (c ? "," : "") << format_real(data.inputs(r, c));
        }
        for (Eigen::Index c = 0; c < data.targets.cols(); ++c) {
            out << ',' << format_real(data.targets(r, c));
        }
        out << '\n';
    }
}

void write_csv(const TaskDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    write_csv(data, out);
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

} // namespace taan
