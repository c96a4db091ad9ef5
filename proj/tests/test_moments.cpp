#include "taan/errors.hpp"
#include "taan/moments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace taan::moments;

namespace {

// Reference values from arbitrary-precision quadrature (mpmath, 30 digits).
constexpr double kReluSqMu1Sigma2 = 4.16144295989866447;
constexpr double kHinge1Hinge1Std = 1.92466021665622925;
constexpr double kReluHinge1Std = 0.0575975343328897294;
constexpr double kReluHinge25 = 0.0740302454040901167; // b = 2.5, mu = -1, sigma = 0.8
constexpr double kHingePair = 0.992204031486813551;    // b = (0.5, -0.5), mu = 0.3, sigma = 1.7

} // namespace

TEST(StdNormalCdf, KnownValues) {
    EXPECT_EQ(std_normal_cdf(0.0), 0.5);
    EXPECT_NEAR(std_normal_cdf(1.0), 0.841344746068542949, 1e-15);
    EXPECT_LT(std_normal_cdf(-8.0), 1e-14);
    EXPECT_NEAR(std_normal_cdf(-8.0), 6.22096057427178412e-16, 1e-28);
}

TEST(StdNormalCdf, SymmetricAndMonotone) {
    double previous = 0.0;
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        const double p = std_normal_cdf(x);
        EXPECT_NEAR(std_normal_cdf(-x), 1.0 - p, 1e-15);
        EXPECT_GE(p, previous);
        previous = p;
    }
}

TEST(MomentB0Sq, Examples) {
    EXPECT_NEAR(moment_b0_sq({0.0, 1.0}), 0.5, 1e-15);
    EXPECT_NEAR(moment_b0_sq({-10.0, 1.0}), 0.0, 1e-6);
    EXPECT_NEAR(moment_b0_sq({1.0, 2.0}), kReluSqMu1Sigma2, 1e-12);
    EXPECT_NEAR(moment_b0_sq({1.0, 2.0}), oracle_moment({BasisPair::ReluRelu}, {1.0, 2.0}), 1e-8);
}

TEST(MomentBB, Examples) {
    EXPECT_NEAR(moment_bb(0.0, 0.0, {0.0, 1.0}), 0.5, 1e-15);
    EXPECT_NEAR(moment_bb(1.0, 1.0, {0.0, 1.0}), 1.92466, 1e-5);
    EXPECT_NEAR(moment_bb(1.0, 1.0, {0.0, 1.0}), kHinge1Hinge1Std, 1e-12);
    EXPECT_EQ(moment_bb(0.5, -0.5, {0.3, 1.7}), moment_bb(-0.5, 0.5, {0.3, 1.7}));
    EXPECT_NEAR(moment_bb(0.5, -0.5, {0.3, 1.7}), kHingePair, 1e-12);
}

TEST(MomentB0B, Examples) {
    EXPECT_EQ(moment_b0b(-0.5, {0.0, 1.0}), 0.0);
    EXPECT_NEAR(moment_b0b(1.0, {0.0, 1.0}), 0.05760, 1e-5);
    EXPECT_NEAR(moment_b0b(1.0, {0.0, 1.0}), kReluHinge1Std, 1e-12);
    EXPECT_NEAR(moment_b0b(2.5, {-1.0, 0.8}), kReluHinge25, 1e-12);
    EXPECT_NEAR(moment_b0b(2.5, {-1.0, 0.8}), oracle_moment({BasisPair::ReluHinge, 2.5}, {-1.0, 0.8}),
                1e-8);
}

TEST(MomentB0B, ContinuousAcrossZero) {
    for (double mu : {-2.0, 0.0, 0.7}) {
        for (double sigma : {0.3, 1.0, 2.5}) {
            EXPECT_LE(std::abs(moment_b0b(1e-9, {mu, sigma}) - moment_b0b(-1e-9, {mu, sigma})), 1e-6);
        }
    }
}

TEST(Oracle, Examples) {
    EXPECT_NEAR(oracle_moment({BasisPair::ReluRelu}, {0.0, 1.0}), 0.5, 1e-10);
    EXPECT_NEAR(oracle_moment({BasisPair::ReluHinge, -1.0}, {0.0, 1.0}), 0.0, 1e-10);
    EXPECT_NEAR(oracle_moment({BasisPair::HingeHinge, 1.0, 1.0}, {0.0, 1.0}), 1.92466, 1e-5);
    EXPECT_NEAR(oracle_moment({BasisPair::HingeHinge, 1.0, 1.0}, {0.0, 1.0}), kHinge1Hinge1Std, 1e-10);
}

TEST(Moments, RejectNonFiniteInput) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    EXPECT_THROW(moment_b0_sq({nan, 1.0}), taan::InvalidArgument);
    EXPECT_THROW(moment_b0_sq({0.0, 0.0}), taan::InvalidArgument);
    EXPECT_THROW(moment_b0_sq({0.0, -1.0}), taan::InvalidArgument);
    EXPECT_THROW(moment_bb(inf, 0.0, {0.0, 1.0}), taan::InvalidArgument);
    EXPECT_THROW(moment_b0b(nan, {0.0, 1.0}), taan::InvalidArgument);
    EXPECT_THROW(oracle_moment({BasisPair::HingeHinge, nan, 0.0}, {0.0, 1.0}), taan::InvalidArgument);
}

TEST(Moments, ClosedFormsMatchOracleOnRandomGrid) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mu(-3.0, 3.0);
    std::uniform_real_distribution<double> sigma(0.3, 3.0);
    std::uniform_real_distribution<double> b(-2.0, 3.0);
    for (int k = 0; k < 300; ++k) {
        const GaussianParams g{mu(rng), sigma(rng)};
        const double bi = b(rng);
        const double bj = b(rng);
        const double relu = moment_b0_sq(g);
        const double mixed = moment_b0b(bi, g);
        const double hinge = moment_bb(bi, bj, g);
        EXPECT_NEAR(relu, oracle_moment({BasisPair::ReluRelu}, g), 1e-8);
        EXPECT_NEAR(mixed, oracle_moment({BasisPair::ReluHinge, bi}, g), 1e-8);
        EXPECT_NEAR(hinge, oracle_moment({BasisPair::HingeHinge, bi, bj}, g), 1e-8);
        EXPECT_EQ(hinge, moment_bb(bj, bi, g));
        EXPECT_GE(relu, 0.0);
        EXPECT_GE(mixed, 0.0);
        EXPECT_GE(hinge, 0.0);
        if (bi <= 0.0) {
            EXPECT_EQ(mixed, 0.0);
        }
    }
}
