#pragma once

// Task adaptive activation network: every hidden linear layer is shared by
// all tasks, each task owns one row of every layer's APL coordinate matrix
// plus its own linear output head.

#include "taan/apl.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace taan {

struct ArchitectureSpec {
    int input_dim = 1;
    std::vector<int> hidden_widths{32};
    int output_dim = 1;
    int task_count = 1;
    int basis_count = 32;
    double grid_lo = -2.0;
    double grid_hi = 2.0;

    /// Three hidden layers of width 1024 and 64 basis functions.
    static ArchitectureSpec wide_default(int input_dim, int output_dim, int task_count);

    /// Throws InvalidArgument for non-positive widths or counts.
    void validate() const;

    friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

struct LinearLayer {
    Eigen::MatrixXd W; // out x in
    Eigen::VectorXd b; // out
};

/// Every trainable tensor of a model. Gradients and optimizer moments use the
/// same layout.
struct ParameterSet {
    std::vector<LinearLayer> layers;
    std::vector<Eigen::MatrixXd> alphas; // one T x M matrix per hidden layer
    std::vector<LinearLayer> heads;      // one per task

    ParameterSet zeros_like() const;
    void set_zero();

    /// Calls fn(tensor) on every tensor, in a fixed order.
    template <class Fn>
    void for_each(Fn&& fn) {
        for (auto& l : layers) {
            fn(l.W);
            fn(l.b);
        }
        for (auto& a : alphas) {
            fn(a);
        }
        for (auto& h : heads) {
            fn(h.W);
            fn(h.b);
        }
    }

    bool same_shape(const ParameterSet& other) const;
};

/// Calls fn(a, b, ...) on matching tensors of same-shaped sets, in the
/// order used by ParameterSet::for_each.
template <class Fn, class First, class... Rest>
void zip_tensors(Fn&& fn, First& first, Rest&... rest) {
    for (std::size_t i = 0; i < first.layers.size(); ++i) {
        fn(first.layers[i].W, rest.layers[i].W...);
        fn(first.layers[i].b, rest.layers[i].b...);
    }
    for (std::size_t i = 0; i < first.alphas.size(); ++i) {
        fn(first.alphas[i], rest.alphas[i]...);
    }
    for (std::size_t i = 0; i < first.heads.size(); ++i) {
        fn(first.heads[i].W, rest.heads[i].W...);
        fn(first.heads[i].b, rest.heads[i].b...);
    }
}

class TaanModel {
public:
    /// Throws ShapeError unless `params` matches `arch` and `grid`.
    TaanModel(ArchitectureSpec arch, BasisGrid grid, ParameterSet params, std::uint64_t seed = 0);

    const ArchitectureSpec& arch() const noexcept { return arch_; }
    const BasisGrid& grid() const noexcept { return grid_; }
    const ParameterSet& params() const noexcept { return params_; }
    ParameterSet& params() noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }

    int task_count() const noexcept { return arch_.task_count; }
    int depth() const noexcept { return static_cast<int>(arch_.hidden_widths.size()); }

    /// Re-checks the parameter shapes after external mutation.
    void validate() const;

private:
    ArchitectureSpec arch_;
    BasisGrid grid_;
    ParameterSet params_;
    std::uint64_t seed_;
};

/// Seeded initialization: W uniform on +-sqrt(6 / fan_in), b = 0, coordinates
/// uniform on [-1e-3, 1e-3]. All task heads start equal.
TaanModel build_model(const ArchitectureSpec& arch, std::uint64_t seed);

/// Replaces every coordinate row by the per-layer mean row so all tasks share
/// one activation per layer. Columns that are already constant are left
/// untouched, which makes the map idempotent.
TaanModel to_hard_sharing(const TaanModel& model);

struct ForwardTrace {
    int task = 0;
    std::vector<Eigen::MatrixXd> inputs; // inputs[l] feeds hidden layer l; inputs[depth] feeds the head
    std::vector<Eigen::MatrixXd> pre;    // pre-activations, batch x width
};

struct ForwardResult {
    Eigen::MatrixXd outputs; // batch x output_dim
    ForwardTrace trace;
};

/// x is batch x input_dim (one sample per row).
ForwardResult forward(const TaanModel& model, int task, const Eigen::MatrixXd& x);

/// Gradients of sum(output_grad .* outputs) with respect to every parameter.
/// Only the traced task's coordinate rows and head are touched.
ParameterSet backward(const TaanModel& model, const ForwardTrace& trace,
                      const Eigen::MatrixXd& output_grad);

/// As backward, but adds into an existing gradient set.
void backward_accumulate(const TaanModel& model, const ForwardTrace& trace,
                         const Eigen::MatrixXd& output_grad, ParameterSet& grads);

} // namespace taan
