#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blw/model.hpp"

namespace blw {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint32_t epoch = 0;
    double best_val_ssd = 0.0;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    ModelGraph model;
    CheckpointMeta meta;
};

std::vector<std::uint8_t> encode_checkpoint(const ModelGraph& model, const CheckpointMeta& meta);
/// Rebuilds the graph from the stored architecture and fills every
/// parameter. FormatError on bad magic/version, truncation or trailing
/// bytes; CompatibilityError when `expected` is given, differs from the
/// stored kind and `force` is false.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                             std::optional<ModelKind> expected = std::nullopt, bool force = false);

void save_checkpoint(const std::string& path, const ModelGraph& model, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path, std::optional<ModelKind> expected = std::nullopt,
                           bool force = false);

}  // namespace blw
