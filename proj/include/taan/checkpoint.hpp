#pragma once

// JSON checkpoints. Reals are written in shortest round-trip form, so a save
// followed by a load reproduces every parameter bit for bit.

#include "taan/metrics.hpp"
#include "taan/network.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace taan {

struct Checkpoint {
    TaanModel model;
    GaussianMixture mixture = GaussianMixture::standard_normal();
};

nlohmann::json architecture_to_json(const ArchitectureSpec& arch);
ArchitectureSpec architecture_from_json(const nlohmann::json& j);

nlohmann::json mixture_to_json(const GaussianMixture& mix);
GaussianMixture mixture_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace taan
