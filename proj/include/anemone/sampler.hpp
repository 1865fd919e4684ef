#pragma once

#include <cstddef>
#include <vector>

#include "anemone/graph.hpp"
#include "anemone/rng.hpp"

namespace anemone {

// Fixed-size view of the neighbourhood of `target`. nodes[0] is the target;
// when the walk finds fewer than K distinct nodes the tail repeats the target
// and those copies are isolated in the induced adjacency with zero features.
struct Subgraph {
  NodeId target = 0;
  std::vector<NodeId> nodes;
  std::size_t num_distinct = 0;
  Matrix adj_norm;  // K x K
  Matrix features;  // K x D

  std::size_t size() const { return nodes.size(); }
};

inline constexpr std::size_t kWalkBudgetPerNode = 100;

// Random walk with restart from `target`: each step returns to the target
// with probability restart_prob, otherwise moves to a uniform neighbour.
// Collects distinct visited nodes in first-visit order until K are found or
// kWalkBudgetPerNode * K steps are spent. The returned view is anonymized.
Subgraph rwr_sample(const AttributedGraph& g, NodeId target, std::size_t k,
                    double restart_prob, Rng& rng);

// Zeroes the target's feature row; every other row is untouched.
Subgraph anonymize(Subgraph sub);

}  // namespace anemone
