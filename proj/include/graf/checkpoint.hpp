#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "graf/scorer.hpp"

namespace graf {

/// Settings needed to rebuild the scoring path around a saved model.
struct CheckpointMeta {
    std::uint64_t encoder_seed = 0;
    std::map<std::string, std::string> attributes;
};

/// Text layout, one token group per line:
///   graf-checkpoint 1
///   dim <d> heads <h> leaky_slope <s> encoder_seed <seed>
///   attr <key> <value>                  (zero or more)
///   tensor <name> <rows> <cols>
///   <row values, space separated, shortest round-trip decimal>
/// Tensors appear in Model::tensors() order: per head w_node, w_edge,
/// a_node, a_edge, then w_query, w_key, w_value, w_final.
std::string serialize_checkpoint(const Model& model, const CheckpointMeta& meta);
void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::filesystem::path& path);

struct Checkpoint {
    Model model;
    CheckpointMeta meta;
};

Checkpoint parse_checkpoint(std::string_view text, std::string_view source = "<memory>");
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace graf
