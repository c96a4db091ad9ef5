#include "taan/apl.hpp"

#include "taan/errors.hpp"

#include <cmath>
#include <string>

namespace taan {

BasisGrid::BasisGrid(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
    if (breakpoints_.empty()) {
        throw InvalidArgument("basis grid needs at least one breakpoint");
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!std::isfinite(breakpoints_[i])) {
            throw InvalidArgument("basis grid breakpoints must be finite");
        }
        if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
            throw InvalidArgument("basis grid breakpoints must be strictly increasing");
        }
    }
}

BasisGrid BasisGrid::uniform(int count, double lo, double hi) {
    if (count < 1) {
        throw InvalidArgument("basis count must be >= 1, got " + std::to_string(count));
    }
    if (!(hi > lo)) {
        throw InvalidArgument("basis grid range must satisfy lo < hi");
    }
    std::vector<double> points(static_cast<std::size_t>(count));
    if (count == 1) {
        points[0] = 0.5 * (lo + hi);
    } else {
        const double step = (hi - lo) / (count - 1);
        for (int i = 0; i < count; ++i) {
            points[static_cast<std::size_t>(i)] = lo + step * i;
        }
        points.back() = hi;
    }
    return BasisGrid(std::move(points));
}

namespace {

void check_length(const CoordsRef& coords, const BasisGrid& grid) {
    if (coords.size() != grid.size()) {
        throw ShapeError("coordinate vector has length " + std::to_string(coords.size()) +
                         ", basis grid has " + std::to_string(grid.size()));
    }
}

// Unchecked kernel; hinges at or below x contribute nothing, so the scan
// stops at the first such breakpoint from the top.
double eval_unchecked(double x, const CoordsRef& coords, const BasisGrid& grid) {
    double value = x > 0.0 ? x : 0.0;
    for (int i = grid.size() - 1; i >= 0 && grid[i] > x; --i) {
        value += coords[i] * (grid[i] - x);
    }
    return value;
}

} // namespace

double apl_eval(double x, const CoordsRef& coords, const BasisGrid& grid) {
    check_length(coords, grid);
    return eval_unchecked(x, coords, grid);
}

Eigen::VectorXd apl_eval_batch(const CoordsRef& pre_activation, const CoordsRef& coords,
                               const BasisGrid& grid) {
    check_length(coords, grid);
    Eigen::VectorXd out(pre_activation.size());
    for (Eigen::Index n = 0; n < pre_activation.size(); ++n) {
        out[n] = eval_unchecked(pre_activation[n], coords, grid);
    }
    return out;
}

double apl_grad_x(double x, const CoordsRef& coords, const BasisGrid& grid) {
    check_length(coords, grid);
    double slope = x > 0.0 ? 1.0 : 0.0;
    for (int i = grid.size() - 1; i >= 0 && grid[i] > x; --i) {
        slope -= coords[i];
    }
    return slope;
}

Eigen::VectorXd apl_grad_coords(double x, const BasisGrid& grid) {
    Eigen::VectorXd out(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double h = grid[i] - x;
        out[i] = h > 0.0 ? h : 0.0;
    }
    return out;
}

} // namespace taan
