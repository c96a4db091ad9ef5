#include "taan/checks.hpp"
#include "taan/errors.hpp"
#include "taan/network.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace taan;

namespace {

ArchitectureSpec small_arch(int tasks = 3) {
    ArchitectureSpec a;
    a.input_dim = 4;
    a.hidden_widths = {6, 5};
    a.output_dim = 2;
    a.task_count = tasks;
    a.basis_count = 5;
    return a;
}

Eigen::MatrixXd random_inputs(std::uint64_t seed, int rows, int cols) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x(i, j) = n(rng);
    return x;
}

bool params_equal(const ParameterSet& a, const ParameterSet& b) {
    bool eq = a.same_shape(b);
    if (!eq) return false;
    zip_tensors([&](const auto& x, const auto& y) { eq = eq && x == y; }, a, b);
    return eq;
}

double max_abs(const ParameterSet& p) {
    double m = 0.0;
    zip_tensors([&](const auto& x) { m = std::max(m, x.size() ? x.cwiseAbs().maxCoeff() : 0.0); }, p);
    return m;
}

} // namespace

TEST(Architecture, Validation) {
    auto a = small_arch();
    a.hidden_widths = {};
    EXPECT_THROW(a.validate(), InvalidArgument);
    a = small_arch();
    a.task_count = 0;
    EXPECT_THROW(a.validate(), InvalidArgument);
    a = small_arch();
    a.basis_count = 0;
    EXPECT_THROW(a.validate(), InvalidArgument);
}

TEST(Architecture, WideDefault) {
    const auto a = ArchitectureSpec::wide_default(10, 5, 4);
    EXPECT_EQ(a.hidden_widths, (std::vector<int>{1024, 1024, 1024}));
    EXPECT_EQ(a.basis_count, 64);
    const TaanModel m = build_model(a, 1);
    EXPECT_EQ(m.depth(), 3);
    EXPECT_EQ(m.params().alphas[2].rows(), 4);
    EXPECT_EQ(m.params().alphas[2].cols(), 64);
    EXPECT_EQ(m.params().layers[1].W.rows(), 1024);
}

TEST(BuildModel, SeedDeterminism) {
    const auto a = build_model(small_arch(), 9);
    const auto b = build_model(small_arch(), 9);
    const auto c = build_model(small_arch(), 10);
    EXPECT_TRUE(params_equal(a.params(), b.params()));
    EXPECT_FALSE(params_equal(a.params(), c.params()));
}

TEST(BuildModel, InitializationRanges) {
    const auto m = build_model(small_arch(), 2);
    const double bound = std::sqrt(6.0 / 4.0);
    EXPECT_LE(m.params().layers[0].W.cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(m.params().layers[0].b, Eigen::VectorXd::Zero(6));
    for (const auto& a : m.params().alphas) EXPECT_LE(a.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(BuildModel, SingleTask) {
    const auto m = build_model(small_arch(1), 3);
    EXPECT_EQ(m.task_count(), 1);
    EXPECT_EQ(m.params().heads.size(), 1u);
    EXPECT_EQ(forward(m, 0, random_inputs(1, 3, 4)).outputs.rows(), 3);
    EXPECT_THROW(forward(m, 1, random_inputs(1, 3, 4)), InvalidArgument);
}

TEST(TaanModel, RejectsMismatchedParams) {
    auto m = build_model(small_arch(), 4);
    ParameterSet p = m.params();
    p.alphas[0] = Eigen::MatrixXd::Zero(3, 4);
    EXPECT_THROW(TaanModel(m.arch(), m.grid(), p), ShapeError);
    EXPECT_THROW(forward(m, 0, random_inputs(1, 2, 3)), ShapeError);
}

TEST(Forward, AbsoluteValueConstruction) {
    ArchitectureSpec a;
    a.input_dim = 1;
    a.hidden_widths = {1};
    a.output_dim = 1;
    a.task_count = 1;
    a.basis_count = 1;
    ParameterSet p;
    p.layers = {{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)}};
    p.alphas = {Eigen::MatrixXd::Ones(1, 1)};
    p.heads = {{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)}};
    const TaanModel m(a, BasisGrid({0.0}), p);
    const auto r = forward(m, 0, Eigen::MatrixXd::Constant(1, 1, -2.0));
    EXPECT_EQ(r.trace.inputs[1](0, 0), 2.0);
    EXPECT_EQ(r.outputs(0, 0), 2.0);
}

TEST(Forward, ZeroCoordinatesMatchReluNetwork) {
    auto m = build_model(small_arch(), 5);
    for (auto& a : m.params().alphas) a.setZero();
    const Eigen::MatrixXd x = random_inputs(2, 7, 4);
    for (int t = 0; t < 3; ++t) {
        Eigen::MatrixXd h = x;
        for (const auto& l : m.params().layers)
            h = ((h * l.W.transpose()).rowwise() + l.b.transpose()).cwiseMax(0.0);
        const auto& head = m.params().heads[static_cast<std::size_t>(t)];
        const Eigen::MatrixXd y = (h * head.W.transpose()).rowwise() + head.b.transpose();
        EXPECT_LE((forward(m, t, x).outputs - y).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Forward, IdenticalRowsAndTiedHeadsAgree) {
    auto m = to_hard_sharing(build_model(small_arch(), 6));
    auto& heads = m.params().heads;
    for (auto& h : heads) h = heads[0];
    const Eigen::MatrixXd x = random_inputs(3, 9, 4);
    const auto y0 = forward(m, 0, x).outputs;
    for (int t = 1; t < 3; ++t) EXPECT_LE((forward(m, t, x).outputs - y0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HardSharing, Examples) {
    ArchitectureSpec a;
    a.input_dim = 1;
    a.hidden_widths = {1};
    a.task_count = 2;
    a.basis_count = 1;
    auto m = build_model(a, 1);
    m.params().alphas[0] << 1.0, 3.0;
    const auto h = to_hard_sharing(m);
    EXPECT_EQ(h.params().alphas[0], Eigen::Vector2d(2.0, 2.0));
    EXPECT_EQ(h.params().layers[0].W, m.params().layers[0].W);
}

TEST(HardSharing, IdempotentAndPreservesIdenticalRows) {
    const auto m = build_model(small_arch(), 7);
    const auto once = to_hard_sharing(m);
    const auto twice = to_hard_sharing(once);
    EXPECT_TRUE(params_equal(once.params(), twice.params()));
    for (std::size_t l = 0; l < once.params().alphas.size(); ++l) {
        const auto& a = once.params().alphas[l];
        for (int t = 1; t < a.rows(); ++t) EXPECT_EQ(a.row(t), a.row(0));
        EXPECT_LE((a.row(0) - m.params().alphas[l].colwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Backward, MatchesFiniteDifferences) {
    const auto r = checks::network_backward_suite(8, 40);
    EXPECT_TRUE(r.passed()) << "worst " << r.worst;
}

TEST(Backward, ZeroOutputGradient) {
    const auto m = build_model(small_arch(), 9);
    const auto f = forward(m, 1, random_inputs(4, 5, 4));
    EXPECT_EQ(max_abs(backward(m, f.trace, Eigen::MatrixXd::Zero(5, 2))), 0.0);
}

TEST(Backward, OnlyForwardedTaskRowsAndHeadReceiveGradient) {
    const auto m = build_model(small_arch(), 10);
    const auto f = forward(m, 1, random_inputs(5, 5, 4));
    const auto g = backward(m, f.trace, random_inputs(6, 5, 2));
    for (const auto& a : g.alphas) {
        EXPECT_EQ(a.row(0), Eigen::RowVectorXd::Zero(a.cols()));
        EXPECT_EQ(a.row(2), Eigen::RowVectorXd::Zero(a.cols()));
        EXPECT_GT(a.row(1).cwiseAbs().maxCoeff(), 0.0);
    }
    EXPECT_EQ(g.heads[0].W.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.heads[2].b.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(g.heads[1].W.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, SharedGradientIsSumOverTasks) {
    const auto m = build_model(small_arch(), 11);
    const Eigen::MatrixXd x = random_inputs(7, 6, 4);
    const Eigen::MatrixXd og = random_inputs(8, 6, 2);
    ParameterSet acc = m.params().zeros_like();
    ParameterSet manual = m.params().zeros_like();
    for (int t = 0; t < 3; ++t) {
        const auto f = forward(m, t, x);
        backward_accumulate(m, f.trace, og, acc);
        const auto g = backward(m, f.trace, og);
        zip_tensors([](auto& s, const auto& d) { s += d; }, manual, g);
    }
    double diff = 0.0;
    zip_tensors([&](const auto& a, const auto& b) {
        if (a.size()) diff = std::max(diff, (a - b).cwiseAbs().maxCoeff());
    }, acc, manual);
    EXPECT_LE(diff, 1e-12);
}
