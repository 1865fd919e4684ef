#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "anemone/contrast.hpp"
#include "anemone/inject.hpp"

namespace anemone {

enum class FeatureNorm { kNone, kRow };

FeatureNorm parse_feature_norm(const std::string& s);
std::string to_string(FeatureNorm norm);

// Everything a pipeline stage needs. Seeds inside `inject` and `train` are
// not read from here; stages derive them from `seed` (see stage_seed).
struct PipelineConfig {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> checkpoint;  // score: explicit checkpoint
  std::optional<std::filesystem::path> scores;      // eval: explicit score CSV

  InjectionSpec inject;
  TrainConfig train;
  FeatureNorm feature_norm = FeatureNorm::kRow;
  std::size_t few_shot = 0;  // k labeled anomalies; 0 = unsupervised

  std::size_t rounds = 256;
  std::optional<double> score_alpha;  // defaults to train.alpha

  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t run_index = 0;

  double scorer_alpha() const { return score_alpha.value_or(train.alpha); }

  // Provenance record echoed into every manifest.
  nlohmann::json to_json() const;
};

// Reads the sectioned key = value format:
//
//   seed = 1            # top level: seed, runs
//   [paths]     edges, features, labels, out
//   [inject]    cliques, clique_size, contextual, candidates
//   [train]     epochs, batch_size, subgraph_size, dim, lr, alpha,
//               restart_prob, few_shot, feature_norm
//   [score]     rounds, alpha
//
// '#' and ';' start comments; values may be quoted. Unknown sections or keys
// are errors. Relative paths resolve against the config file's directory.
PipelineConfig load_config_file(const std::filesystem::path& path);

// Applies `text` (same grammar) on top of `base`. Exposed for tests.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {},
                            const std::filesystem::path& base_dir = {});

}  // namespace anemone
