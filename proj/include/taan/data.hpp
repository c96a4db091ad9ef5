#pragma once

// Multi-task datasets: a synthetic generator with planted task clusters and
// a CSV reader/writer for tabular tasks.

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace taan {

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct TaskDataset {
    Eigen::MatrixXd inputs;  // n x d
    Eigen::MatrixXd targets; // n x k (regression values, or one-hot / multi-hot labels)
    int task = 0;
    Split split = Split::Train;
    std::vector<int> sample_ids; // indices into the task's full sample set

    Eigen::Index size() const noexcept { return inputs.rows(); }

    /// Throws ShapeError on mismatched row counts and InvalidArgument on
    /// non-finite entries.
    void validate() const;
};

struct SyntheticSpec {
    int task_count = 8;
    int samples_per_task = 1000;
    int input_dim = 8;
    std::vector<int> clusters; // cluster id per task; empty means one cluster
    double relatedness = 0.3;  // 0 = identical tasks within a cluster, 1 = independent tasks
    double noise = 0.1;        // standard deviation of additive target noise
    std::uint64_t seed = 0;
    int hidden = 16;           // width of the random generating maps
    double train_fraction = 0.6;
    double val_fraction = 0.2;

    /// Assigns `task_count` tasks to `cluster_count` clusters in contiguous
    /// blocks of (nearly) equal size.
    static std::vector<int> block_clusters(int task_count, int cluster_count);

    void validate() const;
    int cluster_of(int task) const;
};

/// Noise-free target functions of a synthetic benchmark:
///   y_t(x) = sqrt(1 - delta^2) g(x; theta_c(t)) + delta h(x; theta_t)
/// with g a random two-layer tanh map and h a random cosine-feature map, both
/// normalised to zero mean and unit variance under standard-normal inputs.
class SyntheticTasks {
public:
    explicit SyntheticTasks(SyntheticSpec spec);

    const SyntheticSpec& spec() const noexcept { return spec_; }

    /// Noise-free target for each row of x (n x input_dim).
    Eigen::VectorXd target(int task, const Eigen::MatrixXd& x) const;

    /// Train, val and test datasets for every task, ordered task-major.
    std::vector<TaskDataset> generate() const;

private:
    struct RandomMap {
        Eigen::MatrixXd W; // hidden x d
        Eigen::VectorXd b;
        Eigen::VectorXd v;
        double offset = 0.0;
        bool periodic = false; // cos instead of tanh
        Eigen::VectorXd eval(const Eigen::MatrixXd& x) const;
    };
    RandomMap draw_map(std::uint64_t stream, bool periodic) const;

    SyntheticSpec spec_;
    std::vector<RandomMap> cluster_maps_;
    std::vector<RandomMap> task_maps_;
};

std::vector<TaskDataset> generate(const SyntheticSpec& spec);

/// Datasets of one split, ordered by task id.
std::vector<TaskDataset> select_split(const std::vector<TaskDataset>& all, Split split);

struct CsvSchema {
    int input_dim = 1;
    int target_dim = 1;
    int task = 0;
    Split split = Split::Train;
};

/// Header `x0..x{d-1},y0..y{k-1}` followed by one sample per line. Throws
/// ParseError (with line number) on malformed or non-finite cells and
/// EmptyDatasetError when the file holds no samples.
TaskDataset load_csv(const std::string& path, const CsvSchema& schema);
TaskDataset read_csv(std::istream& in, const CsvSchema& schema);

void write_csv(const TaskDataset& data, const std::string& path);
void write_csv(const TaskDataset& data, std::ostream& out);

} // namespace taan
