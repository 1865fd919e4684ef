#include "anemone/sampler.hpp"

#include <algorithm>
#include <string>

#include "anemone/errors.hpp"

namespace anemone {

Subgraph rwr_sample(const AttributedGraph& g, NodeId target, std::size_t k,
                    double restart_prob, Rng& rng) {
  if (k == 0) throw ArgumentError("subgraph size must be at least 1");
  if (!(restart_prob > 0.0 && restart_prob < 1.0)) {
    throw ArgumentError("restart probability must lie in (0, 1)");
  }
  if (target >= g.num_nodes()) {
    throw RangeError("target " + std::to_string(target) + " out of range");
  }

  Subgraph sub;
  sub.target = target;
  sub.nodes.reserve(k);
  sub.nodes.push_back(target);

  const auto& adj = g.adjacency;
  if (adj.degree(target) > 0) {
    std::bernoulli_distribution restart(restart_prob);
    NodeId current = target;
    const std::size_t budget = kWalkBudgetPerNode * k;
    for (std::size_t step = 0; step < budget && sub.nodes.size() < k; ++step) {
      if (restart(rng)) {
        current = target;
        continue;
      }
      const auto row = adj.row(current);
      std::uniform_int_distribution<std::size_t> pick(0, row.size() - 1);
      current = row[pick(rng)];
      if (std::find(sub.nodes.begin(), sub.nodes.end(), current) == sub.nodes.end()) {
        sub.nodes.push_back(current);
      }
    }
  }
  sub.num_distinct = sub.nodes.size();
  sub.nodes.resize(k, target);

  const std::span<const NodeId> nodes(sub.nodes);
  sub.adj_norm = normalize_adjacency(adj, nodes);

  const auto kk = static_cast<Eigen::Index>(k);
  sub.features = Matrix::Zero(kk, g.features.cols());
  for (std::size_t i = 0; i < sub.num_distinct; ++i) {
    sub.features.row(static_cast<Eigen::Index>(i)) = g.features.row(sub.nodes[i]);
  }
  return anonymize(std::move(sub));
}

Subgraph anonymize(Subgraph sub) {
  if (sub.features.rows() > 0) sub.features.row(0).setZero();
  return sub;
}

}  // namespace anemone
