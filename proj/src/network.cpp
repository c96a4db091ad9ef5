#include "taan/network.hpp"

#include "taan/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace taan {

ArchitectureSpec ArchitectureSpec::wide_default(int input_dim, int output_dim, int task_count) {
    ArchitectureSpec arch;
    arch.input_dim = input_dim;
    arch.hidden_widths = {1024, 1024, 1024};
    arch.output_dim = output_dim;
    arch.task_count = task_count;
    arch.basis_count = 64;
    return arch;
}

void ArchitectureSpec::validate() const {
    auto positive = [](int v, const char* what) {
        if (v < 1) {
            throw InvalidArgument(std::string(what) + " must be >= 1, got " + std::to_string(v));
        }
    };
    positive(input_dim, "input_dim");
    positive(output_dim, "output_dim");
    positive(task_count, "task_count");
    positive(basis_count, "basis_count");
    if (hidden_widths.empty()) {
        throw InvalidArgument("architecture needs at least one hidden layer");
    }
    for (int w : hidden_widths) {
        positive(w, "hidden width");
    }
    if (!std::isfinite(grid_lo) || !std::isfinite(grid_hi) || !(grid_hi > grid_lo)) {
        throw InvalidArgument("basis grid range must be finite with lo < hi");
    }
}

ParameterSet ParameterSet::zeros_like() const {
    ParameterSet out = *this;
    out.set_zero();
    return out;
}

void ParameterSet::set_zero() {
    for_each([](auto& t) { t.setZero(); });
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
    if (layers.size() != other.layers.size() || alphas.size() != other.alphas.size() ||
        heads.size() != other.heads.size()) {
        return false;
    }
    bool same = true;
    zip_tensors(
        [&](const auto& a, const auto& b) {
            same = same && a.rows() == b.rows() && a.cols() == b.cols();
        },
        *this, other);
    return same;
}

TaanModel::TaanModel(ArchitectureSpec arch, BasisGrid grid, ParameterSet params, std::uint64_t seed)
    : arch_(std::move(arch)), grid_(std::move(grid)), params_(std::move(params)), seed_(seed) {
    validate();
}

void TaanModel::validate() const {
    arch_.validate();
    if (grid_.size() != arch_.basis_count) {
        throw ShapeError("basis grid size does not match basis_count");
    }
    const auto depth = arch_.hidden_widths.size();
    if (params_.layers.size() != depth || params_.alphas.size() != depth) {
        throw ShapeError("parameter set depth does not match architecture");
    }
    if (params_.heads.size() != static_cast<std::size_t>(arch_.task_count)) {
        throw ShapeError("expected one output head per task");
    }
    auto check_linear = [](const LinearLayer& l, int in, int out, const std::string& what) {
        if (l.W.rows() != out || l.W.cols() != in || l.b.size() != out) {
            throw ShapeError(what + " has shape " + std::to_string(l.W.rows()) + "x" +
                             std::to_string(l.W.cols()) + ", expected " + std::to_string(out) +
                             "x" + std::to_string(in));
        }
    };
    int in = arch_.input_dim;
    for (std::size_t l = 0; l < depth; ++l) {
        const int out = arch_.hidden_widths[l];
        check_linear(params_.layers[l], in, out, "layer " + std::to_string(l));
        const auto& a = params_.alphas[l];
        if (a.rows() != arch_.task_count || a.cols() != arch_.basis_count) {
            throw ShapeError("coordinate matrix " + std::to_string(l) + " must be T x M");
        }
        in = out;
    }
    for (int t = 0; t < arch_.task_count; ++t) {
        check_linear(params_.heads[static_cast<std::size_t>(t)], in, arch_.output_dim,
                     "head " + std::to_string(t));
    }
}

TaanModel build_model(const ArchitectureSpec& arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 rng(seed);

    auto he_uniform = [&rng](int out, int in) {
        const double limit = std::sqrt(6.0 / in);
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(out, in);
        // Row-major fill so the draw order does not depend on Eigen's storage.
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                w(r, c) = dist(rng);
            }
        }
        return w;
    };

    ParameterSet params;
    int in = arch.input_dim;
    for (int width : arch.hidden_widths) {
        params.layers.push_back({he_uniform(width, in), Eigen::VectorXd::Zero(width)});
        in = width;
    }
    std::uniform_real_distribution<double> coord(-1e-3, 1e-3);
    for (std::size_t l = 0; l < arch.hidden_widths.size(); ++l) {
        Eigen::MatrixXd a(arch.task_count, arch.basis_count);
        for (int r = 0; r < arch.task_count; ++r) {
            for (int c = 0; c < arch.basis_count; ++c) {
                a(r, c) = coord(rng);
            }
        }
        params.alphas.push_back(std::move(a));
    }
    // Heads start from one shared draw; tasks then diverge through their data.
    const LinearLayer head{he_uniform(arch.output_dim, in), Eigen::VectorXd::Zero(arch.output_dim)};
    params.heads.assign(static_cast<std::size_t>(arch.task_count), head);
    return TaanModel(arch, BasisGrid::uniform(arch.basis_count, arch.grid_lo, arch.grid_hi),
                     std::move(params), seed);
}

TaanModel to_hard_sharing(const TaanModel& model) {
    TaanModel out = model;
    for (auto& alpha : out.params().alphas) {
        for (Eigen::Index c = 0; c < alpha.cols(); ++c) {
            auto col = alpha.col(c);
            if ((col.array() == col[0]).all()) {
                continue;
            }
            col.setConstant(col.mean());
        }
    }
    return out;
}

namespace {

void check_task(const TaanModel& model, int task) {
    if (task < 0 || task >= model.task_count()) {
        throw InvalidArgument("unknown task id " + std::to_string(task) + " (model has " +
                              std::to_string(model.task_count()) + " tasks)");
    }
}

// Elementwise APL activation with the task's coordinate row.
Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, const Eigen::VectorXd& coords,
                         const BasisGrid& grid) {
    Eigen::MatrixXd out(pre.rows(), pre.cols());
    const int m = grid.size();
    for (Eigen::Index j = 0; j < pre.cols(); ++j) {
        for (Eigen::Index i = 0; i < pre.rows(); ++i) {
            const double x = pre(i, j);
            double y = x > 0.0 ? x : 0.0;
            for (int k = m - 1; k >= 0 && grid[k] > x; --k) {
                y += coords[k] * (grid[k] - x);
            }
            out(i, j) = y;
        }
    }
    return out;
}

} // namespace

ForwardResult forward(const TaanModel& model, int task, const Eigen::MatrixXd& x) {
    check_task(model, task);
    if (x.cols() != model.arch().input_dim) {
        throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(model.arch().input_dim));
    }
    const auto& params = model.params();
    ForwardResult result;
    result.trace.task = task;
    result.trace.inputs.reserve(static_cast<std::size_t>(model.depth()) + 1);
    result.trace.pre.reserve(static_cast<std::size_t>(model.depth()));
    result.trace.inputs.push_back(x);
    for (int l = 0; l < model.depth(); ++l) {
        const auto& layer = params.layers[static_cast<std::size_t>(l)];
        Eigen::MatrixXd pre = result.trace.inputs.back() * layer.W.transpose();
        pre.rowwise() += layer.b.transpose();
        const Eigen::VectorXd coords = params.alphas[static_cast<std::size_t>(l)].row(task).transpose();
        result.trace.inputs.push_back(activate(pre, coords, model.grid()));
        result.trace.pre.push_back(std::move(pre));
    }
    const auto& head = params.heads[static_cast<std::size_t>(task)];
    result.outputs = result.trace.inputs.back() * head.W.transpose();
    result.outputs.rowwise() += head.b.transpose();
    return result;
}

void backward_accumulate(const TaanModel& model, const ForwardTrace& trace,
                         const Eigen::MatrixXd& output_grad, ParameterSet& grads) {
    check_task(model, trace.task);
    const auto depth = static_cast<std::size_t>(model.depth());
    if (trace.inputs.size() != depth + 1 || trace.pre.size() != depth) {
        throw ShapeError("forward trace does not match model depth");
    }
    const Eigen::Index batch = trace.inputs.front().rows();
    if (output_grad.rows() != batch || output_grad.cols() != model.arch().output_dim) {
        throw ShapeError("output gradient must be batch x output_dim");
    }
    if (!grads.same_shape(model.params())) {
        throw ShapeError("gradient set does not match model parameters");
    }

    const auto& params = model.params();
    const auto& grid = model.grid();
    const int m = grid.size();
    const auto task = static_cast<std::size_t>(trace.task);

    auto& head_grad = grads.heads[task];
    head_grad.W.noalias() += output_grad.transpose() * trace.inputs[depth];
    head_grad.b += output_grad.colwise().sum().transpose();
    Eigen::MatrixXd upstream = output_grad * params.heads[task].W;

    for (std::size_t l = depth; l-- > 0;) {
        const Eigen::MatrixXd& pre = trace.pre[l];
        const Eigen::VectorXd coords = params.alphas[l].row(trace.task).transpose();
        Eigen::VectorXd coord_grad = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd pre_grad(pre.rows(), pre.cols());
        for (Eigen::Index j = 0; j < pre.cols(); ++j) {
            for (Eigen::Index i = 0; i < pre.rows(); ++i) {
                const double x = pre(i, j);
                const double g = upstream(i, j);
                double slope = x > 0.0 ? 1.0 : 0.0;
                for (int k = m - 1; k >= 0 && grid[k] > x; --k) {
                    slope -= coords[k];
                    coord_grad[k] += g * (grid[k] - x);
                }
                pre_grad(i, j) = g * slope;
            }
        }
        grads.alphas[l].row(trace.task) += coord_grad.transpose();
        grads.layers[l].W.noalias() += pre_grad.transpose() * trace.inputs[l];
        grads.layers[l].b += pre_grad.colwise().sum().transpose();
        if (l > 0) {
            upstream = pre_grad * params.layers[l].W;
        }
    }
}

ParameterSet backward(const TaanModel& model, const ForwardTrace& trace,
                      const Eigen::MatrixXd& output_grad) {
    ParameterSet grads = model.params().zeros_like();
    backward_accumulate(model, trace, output_grad, grads);
    return grads;
}

} // namespace taan
