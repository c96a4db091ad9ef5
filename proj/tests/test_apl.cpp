#include "oracles.hpp"

#include "taan/apl.hpp"
#include "taan/checks.hpp"
#include "taan/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace taan;

TEST(BasisGrid, Validation) {
    EXPECT_THROW(BasisGrid({}), InvalidArgument);
    EXPECT_THROW(BasisGrid({0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(BasisGrid({1.0, 0.0}), InvalidArgument);
    EXPECT_THROW(BasisGrid({0.0, std::nan("")}), InvalidArgument);
    EXPECT_THROW(BasisGrid::uniform(0), InvalidArgument);
}

TEST(BasisGrid, UniformSpacing) {
    const auto g = BasisGrid::uniform(5);
    EXPECT_EQ(g.breakpoints(), (std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0}));
    EXPECT_EQ(BasisGrid::uniform(1).breakpoints(), std::vector<double>{0.0});
    EXPECT_EQ(BasisGrid::uniform(64).size(), 64);
}

TEST(AplEval, Examples) {
    EXPECT_EQ(apl_eval(2.0, Eigen::VectorXd::Zero(3), BasisGrid::uniform(3)), 2.0);
    EXPECT_EQ(apl_eval(-3.0, Eigen::VectorXd::Ones(1), BasisGrid({0.0})), 3.0);
    EXPECT_DOUBLE_EQ(apl_eval(0.5, Eigen::Vector2d(0.2, -0.1), BasisGrid({-1.0, 1.0})), 0.45);
}

TEST(AplEval, Batch) {
    const BasisGrid grid({-1.0, 1.0});
    const Eigen::Vector2d coords(0.2, -0.1);
    const Eigen::Vector3d x(2.0, -3.0, 0.5);
    const Eigen::VectorXd y = apl_eval_batch(x, coords, grid);
    ASSERT_EQ(y.size(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(y[i], apl_eval(x[i], coords, grid));
    EXPECT_DOUBLE_EQ(y[2], 0.45);
}

TEST(AplEval, ShapeErrors) {
    const BasisGrid grid({-1.0, 1.0});
    EXPECT_THROW(apl_eval(0.0, Eigen::VectorXd::Zero(3), grid), ShapeError);
    EXPECT_THROW(apl_eval_batch(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(1), grid), ShapeError);
    EXPECT_THROW(apl_grad_x(0.0, Eigen::VectorXd::Zero(3), grid), ShapeError);
}

TEST(AplGrad, Examples) {
    EXPECT_EQ(apl_grad_x(2.0, Eigen::VectorXd::Zero(2), BasisGrid({0.0, 1.0})), 1.0);
    EXPECT_EQ(apl_grad_x(-3.0, Eigen::VectorXd::Ones(1), BasisGrid({0.0})), -1.0);
    EXPECT_EQ(apl_grad_coords(5.0, BasisGrid({0.0, 1.0})), Eigen::Vector2d(0.0, 0.0));
    EXPECT_EQ(apl_grad_coords(-1.0, BasisGrid({0.0, 1.0})), Eigen::Vector2d(1.0, 2.0));
}

TEST(AplGrad, HingeConvention) {
    const BasisGrid grid({0.0, 1.0});
    const Eigen::Vector2d coords(0.5, 0.25);
    // x = 0: ReLU uses the right derivative 1[x > 0] = 0, hinge at 0 is inactive.
    EXPECT_EQ(apl_grad_x(0.0, coords, grid), -0.25);
    EXPECT_EQ(apl_grad_x(1.0, coords, grid), 1.0);
}

TEST(AplGrad, MatchesFiniteDifferences) {
    EXPECT_TRUE(checks::apl_grad_x_suite(11, 200).passed());
    EXPECT_TRUE(checks::apl_grad_coords_suite(12, 200).passed());
}

TEST(AplProperties, LinearityContinuityAndReluReduction) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const BasisGrid grid = BasisGrid::uniform(7);
    for (int k = 0; k < 500; ++k) {
        Eigen::VectorXd c1(7), c2(7);
        for (int i = 0; i < 7; ++i) {
            c1[i] = u(rng);
            c2[i] = u(rng);
        }
        // Dyadic x keeps every product exact, so the identity holds bitwise.
        const double x = std::ldexp(std::round(std::ldexp(u(rng), 10)), -10);
        const double relu = std::max(0.0, x);
        EXPECT_NEAR(apl_eval(x, c1 + c2, grid) + relu, apl_eval(x, c1, grid) + apl_eval(x, c2, grid),
                    1e-12);
        EXPECT_EQ(apl_eval(x, Eigen::VectorXd::Zero(7), grid), relu);
        EXPECT_NEAR(apl_eval(x, c1, grid), oracle::apl_direct(x, c1, grid), 1e-12);

        const double eps = 1e-3;
        const double lipschitz = 1.0 + c1.cwiseAbs().sum();
        EXPECT_LE(std::abs(apl_eval(x + eps, c1, grid) - apl_eval(x, c1, grid)), lipschitz * eps + 1e-12);
    }
}
