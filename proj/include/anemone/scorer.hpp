#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anemone/graph.hpp"
#include "anemone/nn.hpp"

namespace anemone {

inline constexpr std::size_t kMaxRounds = 4096;

// b = s~ - s for one round and one view.
double base_score(double positive, double negative);

struct RoundStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double y = 0.0;    // mean + std
};

// Throws ArgumentError for an empty sequence.
RoundStats aggregate_rounds(std::span<const double> base_scores);

// alpha * y_context + (1 - alpha) * y_patch.
double combine(double y_patch, double y_context, double alpha);

struct ScoreConfig {
  std::size_t rounds = 256;
  double alpha = 0.8;
  std::size_t subgraph_size = 4;
  double restart_prob = 0.5;
  std::uint64_t seed = 0;
};

struct NodeReport {
  NodeId node = 0;
  double y = 0.0;
  double y_patch = 0.0;
  double y_context = 0.0;
  double mean_b_p = 0.0;
  double std_b_p = 0.0;
  double mean_b_c = 0.0;
  double std_b_c = 0.0;

  bool operator==(const NodeReport&) const = default;
};

struct AnomalyReport {
  std::vector<NodeReport> nodes;
  std::size_t rounds = 0;
  double alpha = 0.0;
  // Base scores above zero, i.e. rounds where the negative pair outscored
  // the positive one.
  std::size_t positive_base_scores = 0;
};

// Scores every node in `nodes` over R rounds. In round r node i draws fresh
// patch and context views and a uniformly chosen partner u != i from the
// whole graph; the negative pairs i's z with h of u's round-r views. All
// draws come from streams keyed by (seed, node, round), so a node's result
// does not depend on which other nodes are scored alongside it.
AnomalyReport score_all(const AttributedGraph& g, const ModelParams& params,
                        std::span<const NodeId> nodes, const ScoreConfig& cfg);

// CSV: node_id,y,y_patch,y_context,mean_b_p,std_b_p,mean_b_c,std_b_c with
// 17 significant digits.
void save_scores_csv(const std::filesystem::path& path, const AnomalyReport& report);
std::vector<NodeReport> read_scores_csv(const std::filesystem::path& path);

}  // namespace anemone
