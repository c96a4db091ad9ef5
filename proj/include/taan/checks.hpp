#pragma once

// Self-verification suites shared by the `check` command and the test
// binaries: closed-form moments against quadrature, analytic gradients
// against central finite differences, and the first-layer bound check on an
// exact-Gaussian construction.

#include "taan/analysis.hpp"
#include "taan/regularizers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace taan::checks {

struct SuiteResult {
    std::string name;
    long cases = 0;
    double worst = 0.0;     // largest observed error
    double tolerance = 0.0; // pass iff worst <= tolerance

    bool passed() const { return cases > 0 && worst <= tolerance; }
};

void print(const std::vector<SuiteResult>& suites, std::ostream& out);
bool all_passed(const std::vector<SuiteResult>& suites);

/// |closed form - quadrature| over a deterministic grid of at least 200
/// (mu, sigma, b_i, b_j) combinations with mu in [-3, 3], sigma in [0.3, 3],
/// b in [-2, 3], plus `random_cases` seeded random draws from the same box.
/// One suite per moment kind, absolute tolerance 1e-8.
std::vector<SuiteResult> moment_suites(std::uint64_t seed, int random_cases = 200);

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = 1e-4);

inline constexpr double kFiniteDifferenceStep = 1e-6;
inline constexpr double kGradientTolerance = 1e-4;

/// APL dF/dx and dF/dalpha, the three regularizer gradients and full network
/// backward, each at `points` random non-degenerate points.
std::vector<SuiteResult> gradient_suites(std::uint64_t seed, int points = 100);

SuiteResult apl_grad_x_suite(std::uint64_t seed, int points);
SuiteResult apl_grad_coords_suite(std::uint64_t seed, int points);
SuiteResult regularizer_grad_suite(RegularizerKind kind, std::uint64_t seed, int points);
SuiteResult network_backward_suite(std::uint64_t seed, int points);

struct BoundConstruction {
    int input_dim = 4;
    int hidden = 8;
    int basis_count = 8;
    int task_count = 2;
    double coord_scale = 0.5; // coordinates uniform on [-scale, scale]
};

/// Random first layer with standard-normal inputs, exact per-unit Gaussians
/// and envelope `envelope`; checks pairs (0,0) and (0,1).
BoundCheckReport exact_gaussian_bound_check(std::uint64_t seed, long samples, double envelope = 1.0,
                                            const BoundConstruction& construction = {});

} // namespace taan::checks
