#pragma once

// Model checkpoints. Layout (all integers little-endian):
//
//   bytes 0-7   magic "FGNNCKPT"
//   bytes 8-11  uint32 format version (1)
//   bytes 12-19 uint64 header length H
//   next H      UTF-8 JSON header: {"config": {...}, "tensors": [{"name",
//               "shape", "offset"}], "step_block": [...], "residual", "summation"}
//   remainder   float64 payload; each tensor row-major starting at its
//               element `offset`
//
// Complex tensors are stored as two real tensors named "<name>.re" and
// "<name>.im". Optional min-max statistics travel as "norm.min"/"norm.max".
// See docs/checkpoint_format.md.

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "fouriergnn/data.hpp"
#include "fouriergnn/model.hpp"

namespace fgnn {

inline constexpr char kCheckpointMagic[9] = "FGNNCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    FourierGnnModel model;
    std::optional<MinMaxStats> stats;
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const FourierGnnModel& model,
                     const MinMaxStats* stats = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace fgnn
