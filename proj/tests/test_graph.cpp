#include <gtest/gtest.h>

#include <random>

#include "anemone/errors.hpp"
#include "anemone/graph.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace anemone {
namespace {

using testing::fresh_dir;
using testing::write_text;

struct Files {
  std::filesystem::path edges, features, labels;
};

Files write_graph(const std::string& name, const std::string& edges, const std::string& features,
                  const std::string& labels = "") {
  const auto dir = fresh_dir(name);
  Files f{dir / "edges.txt", dir / "features.txt", dir / "labels.txt"};
  write_text(f.edges, edges);
  write_text(f.features, features);
  if (!labels.empty()) write_text(f.labels, labels);
  return f;
}

Matrix dense_adjacency(const CsrAdjacency& a) {
  const auto n = static_cast<Eigen::Index>(a.num_nodes());
  Matrix d = Matrix::Zero(n, n);
  for (auto [u, v] : a.edge_list()) d(u, v) = d(v, u) = 1.0;
  return d;
}

TEST(LoadGraph, MinimalTwoNodeGraph) {
  const auto f = write_graph("minimal", "0 1\n", "1.0\n2.0\n");
  const auto g = load_graph(f.edges, f.features);
  EXPECT_EQ(g.num_nodes(), 2u);
  EXPECT_EQ(g.adjacency.num_edges(), 1u);
  EXPECT_EQ(g.feature_dim(), 1u);
  EXPECT_DOUBLE_EQ(g.features(1, 0), 2.0);
  EXPECT_FALSE(g.labels.has_value());
}

TEST(LoadGraph, ReversedDuplicateCollapses) {
  const auto f0 = write_graph("fwd", "0 1\n", "1.0\n2.0\n");
  const auto a = load_graph(f0.edges, f0.features);
  const auto f = write_graph("rev", "0 1\n1 0\n0\t1\n", "1.0\n2.0\n");
  const auto b = load_graph(f.edges, f.features);
  EXPECT_EQ(a, b);
}

TEST(LoadGraph, CommentsAndBlankLinesIgnored) {
  const auto f = write_graph("comments", "# header\n\n0 1  # trailing\n1\t2\n",
                             "1 0\n0 1\n# note\n1 1\n", "0\n1\n0\n");
  const auto g = load_graph(f.edges, f.features, f.labels);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.adjacency.num_edges(), 2u);
  ASSERT_TRUE(g.labels);
  EXPECT_EQ((*g.labels)[1], 1);
}

TEST(LoadGraph, MalformedLineReportsLineNumber) {
  const auto f = write_graph("malformed", "0 1\n1 x\n", "1\n2\n");
  try {
    load_graph(f.edges, f.features);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  const auto g = write_graph("malformed_feat", "0 1\n", "1\n2 2\n");
  EXPECT_THROW(load_graph(g.edges, g.features), ParseError);
  const auto h = write_graph("three_tokens", "0 1 2\n", "1\n2\n");
  EXPECT_THROW(load_graph(h.edges, h.features), ParseError);
}

TEST(LoadGraph, EndpointOutOfRange) {
  const auto f = write_graph("range", "0 2\n", "1\n2\n");
  EXPECT_THROW(load_graph(f.edges, f.features), RangeError);
}

TEST(LoadGraph, LabelLengthMismatchIsShapeError) {
  const auto f = write_graph("labels_short", "0 1\n", "1\n2\n", "0\n");
  EXPECT_THROW(load_graph(f.edges, f.features, f.labels), ShapeError);
}

TEST(LoadGraph, SelfLoopRejected) {
  const auto f = write_graph("selfloop", "0 1\n1 1\n", "1\n2\n");
  EXPECT_THROW(load_graph(f.edges, f.features), ArgumentError);
}

TEST(LoadGraph, MissingFileIsIoError) {
  EXPECT_THROW(load_graph("/nonexistent/e.txt", "/nonexistent/f.txt"), IoError);
}

TEST(Neighbors, SmallGraphs) {
  AttributedGraph path;
  const std::pair<NodeId, NodeId> e01[] = {{0, 1}};
  path.adjacency = CsrAdjacency::from_edges(3, e01);
  path.features = Matrix::Zero(3, 1);
  EXPECT_EQ(neighbors(path, 0), std::vector<NodeId>{1});
  EXPECT_TRUE(neighbors(path, 2).empty());

  AttributedGraph tri;
  const std::pair<NodeId, NodeId> t[] = {{0, 1}, {1, 2}, {2, 0}};
  tri.adjacency = CsrAdjacency::from_edges(3, t);
  tri.features = Matrix::Zero(3, 1);
  EXPECT_EQ(neighbors(tri, 2), (std::vector<NodeId>{0, 1}));
  EXPECT_THROW(neighbors(tri, 3), RangeError);
}

TEST(NormalizeAdjacency, ForcedValues) {
  const auto single = normalize_adjacency(CsrAdjacency::from_edges(1, {}));
  ASSERT_EQ(single.rows(), 1);
  EXPECT_DOUBLE_EQ(single(0, 0), 1.0);

  const std::pair<NodeId, NodeId> e[] = {{0, 1}};
  const auto pair = normalize_adjacency(CsrAdjacency::from_edges(2, e));
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(pair(i, j), 0.5);
}

TEST(NormalizeAdjacency, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = testing::random_graph(5, 0.5, 1, seed);
    const auto got = normalize_adjacency(g.adjacency);
    const auto want = oracle::normalized_adjacency(dense_adjacency(g.adjacency));
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-15) << "seed " << seed;
  }
}

TEST(NormalizeAdjacency, InducedSubsetFollowsSubsetOrder) {
  const auto g = testing::random_graph(12, 0.4, 1, 3);
  const std::vector<NodeId> subset = {7, 2, 9, 4};
  const auto got = normalize_adjacency(g.adjacency, std::span<const NodeId>(subset));
  Matrix induced = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && g.adjacency.has_edge(subset[i], subset[j])) induced(i, j) = 1.0;
  EXPECT_LT((got - oracle::normalized_adjacency(induced)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NormalizeAdjacency, RepeatedSubsetEntriesAreIsolated) {
  const std::pair<NodeId, NodeId> e[] = {{0, 1}};
  const auto a = CsrAdjacency::from_edges(2, e);
  const std::vector<NodeId> subset = {0, 1, 0, 0};
  const auto got = normalize_adjacency(a, std::span<const NodeId>(subset));
  EXPECT_DOUBLE_EQ(got(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(got(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(got(3, 3), 1.0);
  EXPECT_DOUBLE_EQ(got(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(got(2, 3), 0.0);
}

TEST(RowNormalize, UnitL1RowsAndZeroRowsKept) {
  Matrix x(3, 3);
  x << 1, 1, 2, 0, 0, 0, -1, 3, 0;
  row_normalize_features(x);
  EXPECT_DOUBLE_EQ(x.row(0).cwiseAbs().sum(), 1.0);
  EXPECT_DOUBLE_EQ(x(0, 2), 0.5);
  EXPECT_TRUE(x.row(1).isZero(0.0));
  EXPECT_DOUBLE_EQ(x(2, 0), -0.25);
}

TEST(SaveGraph, RoundTripIsExact) {
  const auto dir = fresh_dir("roundtrip");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = testing::random_graph(30, 0.15, 4, seed);
    std::vector<int> labels(30);
    std::mt19937 rng(static_cast<unsigned>(seed));
    for (auto& l : labels) l = static_cast<int>(rng() % 2);
    g.labels = labels;
    save_graph(g, dir / "e.txt", dir / "f.txt", dir / "l.txt");
    EXPECT_EQ(load_graph(dir / "e.txt", dir / "f.txt", dir / "l.txt"), g) << "seed " << seed;
  }
}

TEST(SaveGraph, TrailingIsolatedNodesSurvive) {
  const auto dir = fresh_dir("isolated");
  AttributedGraph g;
  const std::pair<NodeId, NodeId> e[] = {{0, 1}};
  g.adjacency = CsrAdjacency::from_edges(4, e);
  g.features = Matrix::Ones(4, 2);
  save_graph(g, dir / "e.txt", dir / "f.txt");
  EXPECT_EQ(load_graph(dir / "e.txt", dir / "f.txt"), g);
}

}  // namespace
}  // namespace anemone
