#include "anemone/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "anemone/errors.hpp"
#include "text_io.hpp"

namespace anemone {

CsrAdjacency CsrAdjacency::from_edges(std::size_t num_nodes,
                                      std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> rows(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw RangeError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") has an endpoint >= N = " + std::to_string(num_nodes));
    }
    if (u == v) {
      throw ArgumentError("self-loop on node " + std::to_string(u) + " is not allowed");
    }
    rows[u].push_back(v);
    rows[v].push_back(u);
  }
  CsrAdjacency out;
  out.row_offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto& r = rows[v];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    out.row_offsets_[v + 1] = out.row_offsets_[v] + r.size();
  }
  out.columns_.reserve(out.row_offsets_.back());
  for (const auto& r : rows) out.columns_.insert(out.columns_.end(), r.begin(), r.end());
  return out;
}

bool CsrAdjacency::has_edge(NodeId u, NodeId v) const {
  const auto r = row(u);
  return std::binary_search(r.begin(), r.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> CsrAdjacency::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : row(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

void AttributedGraph::validate() const {
  const auto n = num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw ShapeError("feature matrix has " + std::to_string(features.rows()) +
                     " rows but the graph has " + std::to_string(n) + " nodes");
  }
  if (labels && labels->size() != n) {
    throw ShapeError("label vector has " + std::to_string(labels->size()) +
                     " entries but the graph has " + std::to_string(n) + " nodes");
  }
}

std::vector<std::pair<NodeId, NodeId>> read_edges(const std::filesystem::path& path) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  detail::for_each_data_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = detail::split_whitespace(line);
    if (tokens.size() != 2) {
      throw ParseError(path.string(), line_no, "expected two node ids");
    }
    const auto u = detail::parse_uint(tokens[0], path, line_no);
    const auto v = detail::parse_uint(tokens[1], path, line_no);
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  });
  return edges;
}

Matrix read_features(const std::filesystem::path& path) {
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t rows = 0;
  detail::for_each_data_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = detail::split_whitespace(line);
    if (rows == 0) {
      dim = tokens.size();
      if (dim == 0) throw ParseError(path.string(), line_no, "empty feature row");
    } else if (tokens.size() != dim) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(dim) + " values, found " +
                           std::to_string(tokens.size()));
    }
    for (auto t : tokens) values.push_back(detail::parse_double(t, path, line_no));
    ++rows;
  });
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), out.data());
  return out;
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  detail::for_each_data_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = detail::split_whitespace(line);
    if (tokens.size() != 1) throw ParseError(path.string(), line_no, "expected one label");
    const auto v = detail::parse_uint(tokens[0], path, line_no);
    if (v > 1) throw ParseError(path.string(), line_no, "label must be 0 or 1");
    labels.push_back(static_cast<int>(v));
  });
  return labels;
}

AttributedGraph load_graph(const std::filesystem::path& edge_path,
                           const std::filesystem::path& feature_path,
                           const std::optional<std::filesystem::path>& label_path) {
  AttributedGraph g;
  g.features = read_features(feature_path);
  const auto n = static_cast<std::size_t>(g.features.rows());
  const auto edges = read_edges(edge_path);
  g.adjacency = CsrAdjacency::from_edges(n, edges);
  if (label_path) g.labels = read_labels(*label_path);
  g.validate();
  return g;
}

void save_edges(const std::filesystem::path& path, const CsrAdjacency& adjacency) {
  auto out = detail::open_for_write(path);
  for (const auto& [u, v] : adjacency.edge_list()) out << u << '\t' << v << '\n';
  detail::finish_write(out, path);
}

void save_features(const std::filesystem::path& path, const Matrix& features) {
  auto out = detail::open_for_write(path);
  std::string line;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (c) line.push_back(' ');
      detail::append_double(line, features(r, c));
    }
    line.push_back('\n');
    out << line;
  }
  detail::finish_write(out, path);
}

void save_labels(const std::filesystem::path& path, std::span<const int> labels) {
  auto out = detail::open_for_write(path);
  for (int l : labels) out << l << '\n';
  detail::finish_write(out, path);
}

void save_graph(const AttributedGraph& g, const std::filesystem::path& edge_path,
                const std::filesystem::path& feature_path,
                const std::optional<std::filesystem::path>& label_path) {
  save_edges(edge_path, g.adjacency);
  save_features(feature_path, g.features);
  if (label_path) {
    if (!g.labels) throw StateError("graph has no labels to save");
    save_labels(*label_path, *g.labels);
  }
}

std::vector<NodeId> neighbors(const AttributedGraph& g, NodeId v) {
  if (v >= g.num_nodes()) {
    throw RangeError("node " + std::to_string(v) + " out of range (N = " +
                     std::to_string(g.num_nodes()) + ")");
  }
  const auto r = g.adjacency.row(v);
  return {r.begin(), r.end()};
}

Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("adjacency must be square");
  Matrix tilde = a;
  tilde.diagonal().array() += 1.0;
  const Eigen::VectorXd inv_sqrt = tilde.rowwise().sum().array().rsqrt();
  return inv_sqrt.asDiagonal() * tilde * inv_sqrt.asDiagonal();
}

Matrix normalize_adjacency(const CsrAdjacency& a,
                           std::optional<std::span<const NodeId>> node_subset) {
  std::vector<NodeId> all;
  std::span<const NodeId> nodes;
  if (node_subset) {
    nodes = *node_subset;
  } else {
    all.resize(a.num_nodes());
    for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
    nodes = all;
  }
  const auto k = static_cast<Eigen::Index>(nodes.size());
  std::vector<bool> repeat(nodes.size(), false);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= a.num_nodes()) throw RangeError("subset node out of range");
    for (std::size_t j = 0; j < i && !repeat[i]; ++j) repeat[i] = nodes[j] == nodes[i];
  }
  Matrix dense = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (repeat[i]) continue;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (!repeat[j] && a.has_edge(nodes[i], nodes[j])) dense(i, j) = dense(j, i) = 1.0;
    }
  }
  return normalize_adjacency(dense);
}

void row_normalize_features(Matrix& features) {
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    const double s = features.row(r).cwiseAbs().sum();
    if (s > 0.0) features.row(r) /= s;
  }
}

}  // namespace anemone
