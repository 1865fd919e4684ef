#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "anemone/graph.hpp"
#include "anemone/rng.hpp"

namespace anemone {

struct InjectionSpec {
  std::size_t num_cliques = 0;
  std::size_t clique_size = 15;
  std::size_t num_contextual = 0;
  std::size_t num_candidates = 50;
  std::uint64_t seed = 0;

  std::size_t num_structural() const { return num_cliques * clique_size; }
  std::size_t total() const { return num_structural() + num_contextual; }
};

struct InjectionOutput {
  AttributedGraph graph;
  std::vector<NodeId> anomaly_ids;
  // Contextual injection only: feature_sources[i] is the node whose original
  // row replaced anomaly_ids[i]'s features.
  std::vector<NodeId> feature_sources;
  // Contextual injection only: the sampled candidate pool of each target.
  std::vector<std::vector<NodeId>> candidate_pools;
};

// Picks num_cliques disjoint groups of clique_size currently-unlabeled nodes
// and connects each group completely. Existing edges are kept.
InjectionOutput inject_structural(const AttributedGraph& g, std::size_t num_cliques,
                                  std::size_t clique_size, Rng& rng);

// Candidate whose feature row is farthest (Euclidean) from the target's;
// exact ties go to the lowest node id. `candidates` must be nonempty.
NodeId farthest_candidate(const Matrix& features, NodeId target,
                          std::span<const NodeId> candidates);

// For each of num_targets unlabeled targets, samples num_candidates distinct
// unlabeled auxiliary nodes and copies the row at maximum Euclidean distance
// (ties to the lowest id) over the target's features.
InjectionOutput inject_contextual(const AttributedGraph& g, std::size_t num_targets,
                                  std::size_t num_candidates, Rng& rng);

struct InjectionResult {
  AttributedGraph graph;
  std::vector<NodeId> structural;
  std::vector<NodeId> contextual;
  std::vector<NodeId> contextual_sources;
  std::vector<std::vector<NodeId>> candidate_pools;

  // Contextual ids first, then structural, matching the draw order.
  std::vector<NodeId> anomaly_ids() const;
};

// Contextual targets are drawn first, then the structural groups, from one
// generator seeded by spec.seed.
InjectionResult inject_anomalies(const AttributedGraph& g, const InjectionSpec& spec);

}  // namespace anemone
