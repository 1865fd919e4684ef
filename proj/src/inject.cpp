#include "anemone/inject.hpp"

#include <algorithm>
#include <string>

#include "anemone/errors.hpp"

namespace anemone {
namespace {

std::vector<int> labels_or_zero(const AttributedGraph& g) {
  return g.labels ? *g.labels : std::vector<int>(g.num_nodes(), 0);
}

std::vector<NodeId> unlabeled_nodes(const std::vector<int>& labels) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (labels[v] == 0) out.push_back(v);
  }
  return out;
}

// Partial Fisher-Yates: the first k entries of the result are a uniform
// sample without replacement, in draw order.
std::vector<NodeId> sample_without_replacement(std::vector<NodeId> pool, std::size_t k,
                                               Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

InjectionOutput inject_structural(const AttributedGraph& g, std::size_t num_cliques,
                                  std::size_t clique_size, Rng& rng) {
  auto labels = labels_or_zero(g);
  const auto pool = unlabeled_nodes(labels);
  const auto needed = num_cliques * clique_size;
  if (needed > pool.size()) {
    throw CapacityError("structural injection needs " + std::to_string(needed) +
                        " unlabeled nodes, only " + std::to_string(pool.size()) +
                        " available");
  }
  InjectionOutput out;
  out.anomaly_ids = sample_without_replacement(pool, needed, rng);

  auto edges = g.adjacency.edge_list();
  for (std::size_t c = 0; c < num_cliques; ++c) {
    const auto* group = out.anomaly_ids.data() + c * clique_size;
    for (std::size_t i = 0; i < clique_size; ++i) {
      for (std::size_t j = i + 1; j < clique_size; ++j) edges.emplace_back(group[i], group[j]);
    }
  }
  for (NodeId v : out.anomaly_ids) labels[v] = 1;

  out.graph.adjacency = CsrAdjacency::from_edges(g.num_nodes(), edges);
  out.graph.features = g.features;
  out.graph.labels = std::move(labels);
  return out;
}

NodeId farthest_candidate(const Matrix& features, NodeId target,
                          std::span<const NodeId> candidates) {
  if (candidates.empty()) throw ArgumentError("empty candidate pool");
  const auto x = features.row(target);
  NodeId best = candidates.front();
  double best_dist = -1.0;
  for (NodeId c : candidates) {
    const double d = (features.row(c) - x).squaredNorm();
    if (d > best_dist || (d == best_dist && c < best)) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

InjectionOutput inject_contextual(const AttributedGraph& g, std::size_t num_targets,
                                  std::size_t num_candidates, Rng& rng) {
  if (num_targets > 0 && num_candidates >= g.num_nodes()) {
    throw CapacityError("candidate pool of " + std::to_string(num_candidates) +
                        " needs at least " + std::to_string(num_candidates + 1) + " nodes");
  }
  auto labels = labels_or_zero(g);
  const auto pool = unlabeled_nodes(labels);
  if (num_targets > pool.size()) {
    throw CapacityError("contextual injection needs " + std::to_string(num_targets) +
                        " unlabeled nodes, only " + std::to_string(pool.size()) +
                        " available");
  }

  InjectionOutput out;
  out.graph = g;
  out.anomaly_ids = sample_without_replacement(pool, num_targets, rng);
  out.feature_sources.reserve(num_targets);

  for (NodeId target : out.anomaly_ids) {
    labels[target] = 1;
    // Candidates come from nodes that are still clean, so every copied row
    // is an original one.
    std::vector<NodeId> eligible;
    eligible.reserve(labels.size());
    for (NodeId v = 0; v < labels.size(); ++v) {
      if (labels[v] == 0) eligible.push_back(v);
    }
    if (eligible.size() < num_candidates) {
      throw CapacityError("only " + std::to_string(eligible.size()) +
                          " clean nodes left for a candidate pool of " +
                          std::to_string(num_candidates));
    }
    const auto candidates =
        sample_without_replacement(std::move(eligible), num_candidates, rng);
    const NodeId best = farthest_candidate(g.features, target, candidates);
    out.graph.features.row(target) = g.features.row(best);
    out.feature_sources.push_back(best);
    out.candidate_pools.push_back(candidates);
  }
  out.graph.labels = std::move(labels);
  return out;
}

std::vector<NodeId> InjectionResult::anomaly_ids() const {
  std::vector<NodeId> ids = contextual;
  ids.insert(ids.end(), structural.begin(), structural.end());
  return ids;
}

InjectionResult inject_anomalies(const AttributedGraph& g, const InjectionSpec& spec) {
  auto rng = make_rng(spec.seed, stream::kInject);
  auto ctx = inject_contextual(g, spec.num_contextual, spec.num_candidates, rng);
  auto str = inject_structural(ctx.graph, spec.num_cliques, spec.clique_size, rng);
  InjectionResult result;
  result.graph = std::move(str.graph);
  result.structural = std::move(str.anomaly_ids);
  result.contextual = std::move(ctx.anomaly_ids);
  result.contextual_sources = std::move(ctx.feature_sources);
  result.candidate_pools = std::move(ctx.candidate_pools);
  return result;
}

}  // namespace anemone
