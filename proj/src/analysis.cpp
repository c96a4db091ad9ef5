#include "taan/analysis.hpp"

#include "taan/errors.hpp"
#include "taan/format.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace taan {

std::vector<std::string> default_task_labels(int task_count) {
    std::vector<std::string> labels;
    for (int t = 0; t < task_count; ++t) {
        labels.push_back("task" + std::to_string(t));
    }
    return labels;
}

std::vector<LayerDistanceReport> layer_distances(const TaanModel& model, const GramCache& cache) {
    std::vector<LayerDistanceReport> out;
    for (int l = 0; l < model.depth(); ++l) {
        out.push_back({l, distance_matrix(model.params().alphas[static_cast<std::size_t>(l)], cache),
                       default_task_labels(model.task_count())});
    }
    return out;
}

std::vector<unsigned char> heatmap_pixels(const Eigen::MatrixXd& distances) {
    const double top = distances.size() > 0 ? distances.maxCoeff() : 0.0;
    std::vector<unsigned char> pixels;
    pixels.reserve(static_cast<std::size_t>(distances.size()));
    for (Eigen::Index r = 0; r < distances.rows(); ++r) {
        for (Eigen::Index c = 0; c < distances.cols(); ++c) {
            double level = 0.0;
            if (top > 0.0) {
                level = std::clamp(255.0 * distances(r, c) / top, 0.0, 255.0);
            }
            pixels.push_back(static_cast<unsigned char>(std::lround(level)));
        }
    }
    return pixels;
}

void export_heatmap(const LayerDistanceReport& report, const std::string& path, HeatmapFormat format) {
    const auto& d = report.distances;
    if (format == HeatmapFormat::Csv) {
        std::ofstream out(path);
        if (!out) {
            throw IoError("cannot write '" + path + "'");
        }
        for (std::size_t i = 0; i < report.labels.size(); ++i) {
            out << (i ? "," : "") << report.labels[i];
        }
        out << '\n';
        for (Eigen::Index r = 0; r < d.rows(); ++r) {
            for (Eigen::Index c = 0; c < d.cols(); ++c) {
                out << (c ? "," : "") << format_real(d(r, c));
            }
            out << '\n';
        }
        if (!out) {
            throw IoError("failed writing '" + path + "'");
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << "P5\n" << d.cols() << ' ' << d.rows() << "\n255\n";
    const auto pixels = heatmap_pixels(d);
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

LayerDistanceReport load_heatmap_csv(const std::string& path, int layer) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    LayerDistanceReport report;
    report.layer = layer;
    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyDatasetError("heatmap CSV is empty");
    }
    {
        std::stringstream header(line);
        std::string label;
        while (std::getline(header, label, ',')) {
            report.labels.push_back(label);
        }
    }
    const auto n = static_cast<Eigen::Index>(report.labels.size());
    report.distances.resize(n, n);
    long line_no = 1;
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!std::getline(in, line)) {
            throw ParseError("heatmap CSV ends early", line_no + 1);
        }
        ++line_no;
        std::stringstream row(line);
        std::string cell;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (!std::getline(row, cell, ',')) {
                throw ParseError("heatmap row is too short", line_no);
            }
            try {
                std::size_t used = 0;
                report.distances(r, c) = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ParseError("cannot parse '" + cell + "'", line_no);
            }
        }
    }
    return report;
}

ClusterSeparation cluster_separation(const Eigen::MatrixXd& distances, const std::vector<int>& clusters) {
    if (distances.rows() != distances.cols() ||
        static_cast<std::size_t>(distances.rows()) != clusters.size()) {
        throw ShapeError("cluster assignment must match the distance matrix size");
    }
    double within = 0.0;
    double between = 0.0;
    long n_within = 0;
    long n_between = 0;
    for (Eigen::Index i = 0; i < distances.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < distances.cols(); ++j) {
            if (clusters[static_cast<std::size_t>(i)] == clusters[static_cast<std::size_t>(j)]) {
                within += distances(i, j);
                ++n_within;
            } else {
                between += distances(i, j);
                ++n_between;
            }
        }
    }
    if (n_within == 0 || n_between == 0) {
        throw InvalidArgument("cluster separation needs both within- and between-cluster pairs");
    }
    return {within / static_cast<double>(n_within), between / static_cast<double>(n_between)};
}

InputLaw InputLaw::standard_normal(int dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim)};
}

std::vector<moments::GaussianParams> first_layer_unit_gaussians(const TaanModel& model,
                                                                const InputLaw& law) {
    const auto& layer = model.params().layers.front();
    if (law.mean.size() != layer.W.cols() || law.covariance.rows() != layer.W.cols() ||
        law.covariance.cols() != layer.W.cols()) {
        throw ShapeError("input law dimension does not match the first layer");
    }
    const Eigen::VectorXd mean = layer.W * law.mean + layer.b;
    const Eigen::VectorXd var = (layer.W * law.covariance * layer.W.transpose()).diagonal();
    std::vector<moments::GaussianParams> out;
    for (Eigen::Index n = 0; n < mean.size(); ++n) {
        out.push_back({mean[n], std::sqrt(std::max(var[n], 0.0))});
    }
    return out;
}

bool BoundCheckReport::passed() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const BoundPairResult& p) { return p.passed(); });
}

void BoundCheckReport::write_text(std::ostream& out) const {
    out << "first-layer bound check: C1=" << envelope << ", samples=" << samples << ", seed=" << seed
        << '\n';
    out << std::left << std::setw(8) << "pair" << std::setw(14) << "inner_left" << std::setw(12)
        << "stderr" << std::setw(14) << "inner_right" << std::setw(14) << "dist_left" << std::setw(12)
        << "stderr" << std::setw(14) << "dist_right" << "result\n";
    for (const auto& p : pairs) {
        std::ostringstream pair;
        pair << p.t1 << ',' << p.t2;
        out << std::setw(8) << pair.str() << std::setprecision(8) << std::setw(14) << p.inner_left
            << std::setw(12) << std::setprecision(3) << p.inner_stderr << std::setprecision(8)
            << std::setw(14) << p.inner_right << std::setw(14) << p.dist_left << std::setw(12)
            << std::setprecision(3) << p.dist_stderr << std::setprecision(8) << std::setw(14)
            << p.dist_right << (p.passed() ? "pass" : "FAIL") << '\n';
    }
}

void BoundCheckReport::write_csv(std::ostream& out) const {
    out << "t1,t2,inner_left,inner_stderr,inner_right,dist_left,dist_stderr,dist_right,pass\n";
    for (const auto& p : pairs) {
        out << p.t1 << ',' << p.t2 << ',' << format_real(p.inner_left) << ','
            << format_real(p.inner_stderr) << ',' << format_real(p.inner_right) << ','
            << format_real(p.dist_left) << ',' << format_real(p.dist_stderr) << ','
            << format_real(p.dist_right) << ',' << (p.passed() ? 1 : 0) << '\n';
    }
}

namespace {

struct RunningMoments {
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
    }
    double mean(long n) const { return sum / static_cast<double>(n); }
    double stderr_of_mean(long n) const {
        const double m = mean(n);
        const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                             static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

} // namespace

BoundCheckReport check_l1_bounds(const TaanModel& model,
                                 const std::vector<moments::GaussianParams>& unit_gaussians,
                                 double envelope, const std::vector<std::pair<int, int>>& pairs,
                                 long mc_samples, std::uint64_t seed, const InputLaw& law) {
    if (!(envelope > 0.0) || !std::isfinite(envelope)) {
        throw InvalidArgument("envelope C1 must be positive");
    }
    if (mc_samples < 2) {
        throw InvalidArgument("need at least two Monte-Carlo samples");
    }
    const auto& layer = model.params().layers.front();
    const Eigen::Index units = layer.W.rows();
    const Eigen::Index dim = layer.W.cols();
    if (static_cast<Eigen::Index>(unit_gaussians.size()) != units) {
        throw ShapeError("need one Gaussian per first-layer unit");
    }
    if (law.mean.size() != dim || law.covariance.rows() != dim || law.covariance.cols() != dim) {
        throw ShapeError("input law dimension does not match the first layer");
    }
    for (const auto& [t1, t2] : pairs) {
        if (t1 < 0 || t2 < 0 || t1 >= model.task_count() || t2 >= model.task_count()) {
            throw InvalidArgument("task pair out of range");
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> chol(law.covariance);
    if (chol.info() != Eigen::Success) {
        throw NumericError("input covariance is not positive definite");
    }
    const Eigen::MatrixXd lower = chol.matrixL();

    BoundCheckReport report;
    report.envelope = envelope;
    report.samples = mc_samples;
    report.seed = seed;

    // Right-hand sides: per-unit Gram caches.
    const auto& alpha = model.params().alphas.front();
    std::vector<GramCache> unit_caches;
    unit_caches.reserve(static_cast<std::size_t>(units));
    for (const auto& g : unit_gaussians) {
        unit_caches.push_back(build_gram(model.grid(), GaussianMixture({MixtureComponent{1.0, g}})));
    }
    for (const auto& [t1, t2] : pairs) {
        BoundPairResult r;
        r.t1 = t1;
        r.t2 = t2;
        const Eigen::VectorXd a1 = alpha.row(t1).transpose();
        const Eigen::VectorXd a2 = alpha.row(t2).transpose();
        for (const auto& cache : unit_caches) {
            r.inner_right += inner_product(a1, a2, cache);
            r.dist_right += distance_sq(a1, a2, cache);
        }
        r.inner_right *= envelope;
        r.dist_right *= envelope;
        report.pairs.push_back(r);
    }

    // Left-hand sides by Monte Carlo, in fixed-size blocks.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<RunningMoments> inner(pairs.size());
    std::vector<RunningMoments> dist(pairs.size());
    constexpr long kBlock = 4096;
    Eigen::MatrixXd z(kBlock, dim);
    for (long done = 0; done < mc_samples; done += kBlock) {
        const long count = std::min(kBlock, mc_samples - done);
        for (long i = 0; i < count; ++i) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                z(i, c) = normal(rng);
            }
        }
        Eigen::MatrixXd x = z.topRows(count) * lower.transpose();
        x.rowwise() += law.mean.transpose();
        Eigen::MatrixXd pre = x * layer.W.transpose();
        pre.rowwise() += layer.b.transpose();
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [t1, t2] = pairs[p];
            const Eigen::VectorXd c1 = alpha.row(t1).transpose();
            const Eigen::VectorXd c2 = alpha.row(t2).transpose();
            for (long i = 0; i < count; ++i) {
                double ip = 0.0;
                double dd = 0.0;
                for (Eigen::Index n = 0; n < units; ++n) {
                    const double a = pre(i, n);
                    const double h1 = apl_eval(a, c1, model.grid());
                    const double h2 = apl_eval(a, c2, model.grid());
                    ip += h1 * h2;
                    dd += (h1 - h2) * (h1 - h2);
                }
                inner[p].add(ip);
                dist[p].add(dd);
            }
        }
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto& r = report.pairs[p];
        r.inner_left = inner[p].mean(mc_samples);
        r.inner_stderr = inner[p].stderr_of_mean(mc_samples);
        r.dist_left = dist[p].mean(mc_samples);
        r.dist_stderr = dist[p].stderr_of_mean(mc_samples);
    }
    return report;
}

} // namespace taan
