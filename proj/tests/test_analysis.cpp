#include "taan/analysis.hpp"
#include "taan/benchmark.hpp"
#include "taan/checks.hpp"
#include "taan/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

using namespace taan;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("taan_test_analysis_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ArchitectureSpec small_arch() {
    ArchitectureSpec a;
    a.input_dim = 3;
    a.hidden_widths = {6, 6, 4};
    a.task_count = 4;
    a.basis_count = 8;
    return a;
}

const GramCache& std_cache8() {
    static const GramCache c = build_gram(BasisGrid::uniform(8), GaussianMixture::standard_normal());
    return c;
}

} // namespace

TEST(Heatmap, PixelExamples) {
    EXPECT_EQ(heatmap_pixels(Eigen::MatrixXd::Zero(3, 3)), std::vector<unsigned char>(9, 0));
    Eigen::Matrix2d d;
    d << 0, 0.5, 0.5, 0;
    EXPECT_EQ(heatmap_pixels(d), (std::vector<unsigned char>{0, 255, 255, 0}));
}

TEST(Heatmap, MonotoneScaling) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    Eigen::MatrixXd d(5, 5);
    for (int i = 0; i < 25; ++i) d(i / 5, i % 5) = u(rng);
    const auto px = heatmap_pixels(d);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j)
            if (d(i / 5, i % 5) < d(j / 5, j % 5)) EXPECT_LE(px[static_cast<std::size_t>(i)], px[static_cast<std::size_t>(j)]);
    EXPECT_EQ(*std::max_element(px.begin(), px.end()), 255);
}

TEST(Heatmap, PgmFile) {
    const auto dir = scratch_dir("pgm");
    LayerDistanceReport r{0, Eigen::Matrix2d{{0, 0.5}, {0.5, 0}}, default_task_labels(2)};
    export_heatmap(r, (dir / "m.pgm").string(), HeatmapFormat::Pgm);
    EXPECT_EQ(read_bytes(dir / "m.pgm"), std::string("P5\n2 2\n255\n\x00\xff\xff\x00", 15));
}

TEST(Heatmap, CsvRoundTrip) {
    const auto dir = scratch_dir("csv");
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd d(3, 3);
    for (int i = 0; i < 9; ++i) d(i / 3, i % 3) = std::exp(n(rng)) * 1e-3;
    LayerDistanceReport r{2, d, {"a", "b", "c"}};
    export_heatmap(r, (dir / "m.csv").string(), HeatmapFormat::Csv);
    const auto back = load_heatmap_csv((dir / "m.csv").string(), 2);
    EXPECT_EQ(back.labels, r.labels);
    EXPECT_EQ(back.distances, d);
    EXPECT_EQ(read_bytes(dir / "m.csv").substr(0, 6), "a,b,c\n");
    EXPECT_THROW(load_heatmap_csv((dir / "missing.csv").string()), IoError);
}

TEST(LayerDistances, FreshModelIsNearlyShared) {
    const auto m = build_model(small_arch(), 3);
    const auto reports = layer_distances(m, std_cache8());
    ASSERT_EQ(reports.size(), 3u);
    for (const auto& r : reports) {
        EXPECT_EQ(r.distances.rows(), 4);
        EXPECT_EQ(r.labels, default_task_labels(4));
        EXPECT_LT(r.distances.maxCoeff(), 1e-3);
        EXPECT_EQ(r.distances.diagonal(), Eigen::VectorXd::Zero(4));
    }
}

TEST(LayerDistances, HardSharingGivesZero) {
    auto m = build_model(small_arch(), 4);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& a : m.params().alphas)
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
    for (const auto& r : layer_distances(to_hard_sharing(m), std_cache8()))
        EXPECT_EQ(r.distances, Eigen::MatrixXd::Zero(4, 4));
}

TEST(ClusterSeparation, Example) {
    Eigen::Matrix4d d;
    d << 0, 1, 4, 6,
         1, 0, 5, 7,
         4, 5, 0, 2,
         6, 7, 2, 0;
    const auto s = cluster_separation(d, {0, 0, 1, 1});
    EXPECT_DOUBLE_EQ(s.within, 1.5);
    EXPECT_DOUBLE_EQ(s.between, 5.5);
    EXPECT_THROW(cluster_separation(d, {0, 1}), ShapeError);
}

TEST(ClusterSeparation, TrainedPlantedModelRecoversClusters) {
    auto bench = PlantedBenchmark::defaults();
    bench.coefficients = {0.0};
    const auto r = run_planted_benchmark(bench, 0, false);
    const auto& sep = r.unregularized().last_layer;
    EXPECT_LT(sep.within, sep.between);
}

TEST(BoundCheck, UnitGaussiansOfFirstLayer) {
    auto m = build_model(small_arch(), 5);
    m.params().layers[0].b.setConstant(0.25);
    const auto g = first_layer_unit_gaussians(m, InputLaw::standard_normal(3));
    ASSERT_EQ(g.size(), 6u);
    for (int u = 0; u < 6; ++u) {
        EXPECT_EQ(g[static_cast<std::size_t>(u)].mu, 0.25);
        EXPECT_NEAR(g[static_cast<std::size_t>(u)].sigma, m.params().layers[0].W.row(u).norm(), 1e-15);
    }
}

TEST(BoundCheck, ExactGaussianEquality) {
    const auto report = checks::exact_gaussian_bound_check(6, 1'000'000);
    ASSERT_EQ(report.pairs.size(), 2u);
    EXPECT_TRUE(report.passed());
    for (const auto& p : report.pairs) {
        EXPECT_TRUE(p.inner_tight());
        EXPECT_TRUE(p.dist_tight());
    }
    EXPECT_EQ(report.pairs[0].dist_left, 0.0);
    EXPECT_EQ(report.pairs[0].dist_stderr, 0.0);
}

TEST(BoundCheck, DoubledEnvelopeLeavesHalfMargin) {
    const auto report = checks::exact_gaussian_bound_check(7, 1'000'000, 2.0);
    EXPECT_TRUE(report.passed());
    const auto& p = report.pairs[1];
    EXPECT_FALSE(p.inner_tight());
    EXPECT_NEAR(p.inner_left, 0.5 * p.inner_right, 3.0 * p.inner_stderr);
    EXPECT_NEAR(p.dist_left, 0.5 * p.dist_right, 3.0 * p.dist_stderr);
}

TEST(BoundCheck, Errors) {
    const auto m = build_model(small_arch(), 8);
    const auto g = first_layer_unit_gaussians(m, InputLaw::standard_normal(3));
    const auto law = InputLaw::standard_normal(3);
    EXPECT_THROW(check_l1_bounds(m, g, 0.0, {{0, 1}}, 100, 1, law), InvalidArgument);
    EXPECT_THROW(check_l1_bounds(m, g, 1.0, {{0, 1}}, 1, 1, law), InvalidArgument);
    EXPECT_THROW(check_l1_bounds(m, {g[0]}, 1.0, {{0, 1}}, 100, 1, law), ShapeError);
}

TEST(BoundCheck, ReportWriters) {
    const auto report = checks::exact_gaussian_bound_check(9, 1000);
    std::ostringstream text, csv;
    report.write_text(text);
    report.write_csv(csv);
    EXPECT_NE(text.str().find("pair"), std::string::npos);
    const std::string table = csv.str();
    // Header plus one row per pair.
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
}
