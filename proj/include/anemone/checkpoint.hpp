#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anemone/nn.hpp"
#include "anemone/types.hpp"

namespace anemone {

// Checkpoint container, stored as a single JSON document:
//
//   {
//     "magic": "ANEMONE-CHECKPOINT",
//     "version": 1,
//     "config_hash": "<16 hex digits, FNV-1a 64 of config.dump()>",
//     "config": { ... training configuration ... },
//     "labeled_ids": [ ... ],           // few-shot training set, else []
//     "params": { "theta": M, "phi": M, "w_p": M, "w_c": M },
//     "adam": { "step_count", "learning_rate", "beta1", "beta2", "epsilon",
//               "first_moment": {4 x M}, "second_moment": {4 x M} }
//   }
//
// where M = { "rows": r, "cols": c, "data": [row-major doubles] }. Doubles are
// written with round-trip precision, so a reload is bit-exact.
inline constexpr std::string_view kCheckpointMagic = "ANEMONE-CHECKPOINT";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  AdamState adam;
  nlohmann::json config = nlohmann::json::object();
  std::vector<NodeId> labeled_ids;

  std::uint64_t config_hash() const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws ParseError on a wrong magic, unknown version or malformed body.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace anemone
