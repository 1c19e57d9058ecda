#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "apple/nn/adam.hpp"
#include "apple/nn/mlp.hpp"

namespace apple::nn {

inline constexpr int kCheckpointVersion = 1;

/// {"format": "apple-mlp", "version": 1, "layer_sizes": [...],
///  "layers": [{"weight": [...col-major...], "bias": [...]}, ...]}
[[nodiscard]] nlohmann::json to_json(const Mlp& net);
[[nodiscard]] Mlp mlp_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const AdamState& state);
/// Restores optimizer moments; shapes must match `net`.
[[nodiscard]] AdamState adam_from_json(const nlohmann::json& j, const Mlp& net);

[[nodiscard]] nlohmann::json to_json(const ScalarAdam& state);
[[nodiscard]] ScalarAdam scalar_adam_from_json(const nlohmann::json& j);

/// Stand-alone network checkpoint: network, optimizer state, global step.
struct Checkpoint {
    Mlp net;
    AdamState adam;
    std::int64_t global_step = 0;
};
[[nodiscard]] nlohmann::json to_json(const Checkpoint& ckpt);
[[nodiscard]] Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace apple::nn
