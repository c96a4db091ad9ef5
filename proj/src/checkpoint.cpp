#include "taan/checkpoint.hpp"

#include "taan/errors.hpp"

#include <fstream>

namespace taan {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) {
        throw ShapeError("checkpoint matrix row count mismatch");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = data.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ShapeError("checkpoint matrix column count mismatch");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    }
    return v;
}

json linear_to_json(const LinearLayer& l) {
    return {{"W", matrix_to_json(l.W)}, {"b", vector_to_json(l.b)}};
}

LinearLayer linear_from_json(const json& j) {
    return {matrix_from_json(j.at("W")), vector_from_json(j.at("b"))};
}

} // namespace

json architecture_to_json(const ArchitectureSpec& arch) {
    return {{"input_dim", arch.input_dim},     {"hidden_widths", arch.hidden_widths},
            {"output_dim", arch.output_dim},   {"task_count", arch.task_count},
            {"basis_count", arch.basis_count}, {"grid_lo", arch.grid_lo},
            {"grid_hi", arch.grid_hi}};
}

ArchitectureSpec architecture_from_json(const json& j) {
    ArchitectureSpec arch;
    arch.input_dim = j.value("input_dim", arch.input_dim);
    arch.hidden_widths = j.value("hidden_widths", arch.hidden_widths);
    arch.output_dim = j.value("output_dim", arch.output_dim);
    arch.task_count = j.value("task_count", arch.task_count);
    arch.basis_count = j.value("basis_count", arch.basis_count);
    arch.grid_lo = j.value("grid_lo", arch.grid_lo);
    arch.grid_hi = j.value("grid_hi", arch.grid_hi);
    arch.validate();
    return arch;
}

json mixture_to_json(const GaussianMixture& mix) {
    json out = json::array();
    for (const auto& c : mix.components()) {
        out.push_back({{"pi", c.weight}, {"mu", c.gaussian.mu}, {"sigma", c.gaussian.sigma}});
    }
    return out;
}

GaussianMixture mixture_from_json(const json& j) {
    std::vector<MixtureComponent> components;
    for (const auto& c : j) {
        components.push_back(
            {c.at("pi").get<double>(), {c.at("mu").get<double>(), c.at("sigma").get<double>()}});
    }
    return GaussianMixture(std::move(components));
}

json checkpoint_to_json(const Checkpoint& checkpoint) {
    const auto& model = checkpoint.model;
    const auto& params = model.params();
    json layers = json::array();
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        json layer = linear_to_json(params.layers[l]);
        layer["alpha"] = matrix_to_json(params.alphas[l]);
        layers.push_back(std::move(layer));
    }
    json heads = json::array();
    for (const auto& h : params.heads) {
        heads.push_back(linear_to_json(h));
    }
    return {{"format", "taan-checkpoint"},
            {"version", kFormatVersion},
            {"seed", model.seed()},
            {"architecture", architecture_to_json(model.arch())},
            {"breakpoints", model.grid().breakpoints()},
            {"mixture", mixture_to_json(checkpoint.mixture)},
            {"layers", std::move(layers)},
            {"heads", std::move(heads)}};
}

Checkpoint checkpoint_from_json(const json& j) {
    if (j.value("format", std::string()) != "taan-checkpoint") {
        throw InvalidArgument("not a TAAN checkpoint");
    }
    if (j.value("version", 0) != kFormatVersion) {
        throw InvalidArgument("unsupported checkpoint version");
    }
    const ArchitectureSpec arch = architecture_from_json(j.at("architecture"));
    BasisGrid grid(j.at("breakpoints").get<std::vector<double>>());
    ParameterSet params;
    for (const auto& layer : j.at("layers")) {
        params.layers.push_back(linear_from_json(layer));
        params.alphas.push_back(matrix_from_json(layer.at("alpha")));
    }
    for (const auto& h : j.at("heads")) {
        params.heads.push_back(linear_from_json(h));
    }
    return {TaanModel(arch, std::move(grid), std::move(params), j.at("seed").get<std::uint64_t>()),
            mixture_from_json(j.at("mixture"))};
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << checkpoint_to_json(checkpoint).dump(1) << '\n';
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 0);
    }
    return checkpoint_from_json(j);
}

} // namespace taan
