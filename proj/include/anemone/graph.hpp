#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "anemone/types.hpp"

namespace anemone {

// Symmetric binary adjacency in compressed row form. Column indices within a
// row are sorted ascending and unique; there are no stored self-loops.
class CsrAdjacency {
 public:
  CsrAdjacency() : row_offsets_{0} {}

  // Builds from an undirected edge list. Reversed and duplicated pairs
  // collapse to one undirected edge. Self-loops and out-of-range endpoints
  // throw.
  static CsrAdjacency from_edges(std::size_t num_nodes,
                                 std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t num_nodes() const { return row_offsets_.size() - 1; }
  // Number of undirected edges.
  std::size_t num_edges() const { return columns_.size() / 2; }

  std::span<const NodeId> row(NodeId v) const {
    return {columns_.data() + row_offsets_[v], columns_.data() + row_offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return row_offsets_[v + 1] - row_offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  // Each undirected edge once, as (u, v) with u < v, in row order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  bool operator==(const CsrAdjacency&) const = default;

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> columns_;
};

struct AttributedGraph {
  CsrAdjacency adjacency;
  Matrix features;  // N x D
  std::optional<std::vector<int>> labels;  // 1 = anomaly

  std::size_t num_nodes() const { return adjacency.num_nodes(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }

  // Throws ShapeError when rows/labels disagree with the adjacency.
  void validate() const;

  bool operator==(const AttributedGraph& other) const {
    return adjacency == other.adjacency && features == other.features &&
           labels == other.labels;
  }
};

AttributedGraph load_graph(const std::filesystem::path& edge_path,
                           const std::filesystem::path& feature_path,
                           const std::optional<std::filesystem::path>& label_path = std::nullopt);

std::vector<std::pair<NodeId, NodeId>> read_edges(const std::filesystem::path& path);
Matrix read_features(const std::filesystem::path& path);
std::vector<int> read_labels(const std::filesystem::path& path);

// Writes the canonical text formats. Features are written in shortest
// round-trip form, so load after save reproduces every double exactly.
void save_edges(const std::filesystem::path& path, const CsrAdjacency& adjacency);
void save_features(const std::filesystem::path& path, const Matrix& features);
void save_labels(const std::filesystem::path& path, std::span<const int> labels);
void save_graph(const AttributedGraph& g, const std::filesystem::path& edge_path,
                const std::filesystem::path& feature_path,
                const std::optional<std::filesystem::path>& label_path = std::nullopt);

// Sorted neighbour list of v.
std::vector<NodeId> neighbors(const AttributedGraph& g, NodeId v);

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I. With a node subset the
// result is the normalisation of the induced subgraph, in subset order.
// Repeated subset entries (padding) after the first occurrence are isolated.
Matrix normalize_adjacency(const CsrAdjacency& a,
                           std::optional<std::span<const NodeId>> node_subset = std::nullopt);

// Dense overload used for sampled subgraphs; `a` must be symmetric binary
// with a zero diagonal.
Matrix normalize_adjacency(const Matrix& a);

// Scales each feature row to unit L1 norm; all-zero rows stay zero.
void row_normalize_features(Matrix& features);

}  // namespace anemone
