#pragma once

// Adaptive piecewise-linear (APL) activation
//   F(x) = max(0, x) + sum_i alpha_i * max(0, -x + b_i)
// over a fixed, strictly increasing breakpoint grid.

#include <Eigen/Core>

#include <vector>

namespace taan {

class BasisGrid {
public:
    /// Throws InvalidArgument unless breakpoints are finite, non-empty and
    /// strictly increasing.
    explicit BasisGrid(std::vector<double> breakpoints);

    /// `count` evenly spaced breakpoints on [lo, hi]; a single breakpoint sits
    /// at the midpoint.
    static BasisGrid uniform(int count, double lo = -2.0, double hi = 2.0);

    int size() const noexcept { return static_cast<int>(breakpoints_.size()); }
    double operator[](int i) const { return breakpoints_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

    friend bool operator==(const BasisGrid&, const BasisGrid&) = default;

private:
    std::vector<double> breakpoints_;
};

using CoordsRef = Eigen::Ref<const Eigen::VectorXd>;

double apl_eval(double x, const CoordsRef& coords, const BasisGrid& grid);

Eigen::VectorXd apl_eval_batch(const CoordsRef& pre_activation, const CoordsRef& coords,
                               const BasisGrid& grid);

/// dF/dx = 1[x > 0] - sum_i alpha_i 1[x < b_i]. At a hinge the derivative
/// takes the value from the inactive side, so the result is deterministic.
double apl_grad_x(double x, const CoordsRef& coords, const BasisGrid& grid);

/// dF/dalpha_i = max(0, -x + b_i); independent of the coordinates.
Eigen::VectorXd apl_grad_coords(double x, const BasisGrid& grid);

} // namespace taan
