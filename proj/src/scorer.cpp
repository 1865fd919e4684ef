#include "anemone/scorer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "anemone/errors.hpp"
#include "anemone/parallel.hpp"
#include "anemone/rng.hpp"
#include "anemone/sampler.hpp"
#include "text_io.hpp"

namespace anemone {
namespace {

constexpr const char* kScoreHeader =
    "node_id,y,y_patch,y_context,mean_b_p,std_b_p,mean_b_c,std_b_c";

constexpr std::size_t kUnused = static_cast<std::size_t>(-1);

struct ViewEmbeddings {
  Vector h_patch;
  Vector h_context;
};

ViewEmbeddings embed_views(const AttributedGraph& g, const ModelParams& params, NodeId v,
                           std::uint64_t round, const ScoreConfig& cfg) {
  auto patch_rng = make_rng(cfg.seed, stream::kPatchView, v, round);
  auto context_rng = make_rng(cfg.seed, stream::kContextView, v, round);
  const auto patch = rwr_sample(g, v, cfg.subgraph_size, cfg.restart_prob, patch_rng);
  const auto context = rwr_sample(g, v, cfg.subgraph_size, cfg.restart_prob, context_rng);
  ViewEmbeddings e;
  e.h_patch = gcn_propagate(patch.adj_norm, patch.features, params.theta).row(0);
  e.h_context = readout(gcn_propagate(context.adj_norm, context.features, params.phi));
  return e;
}

void append_field(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), ",%.17g", v);
  line += buf;
}

}  // namespace

double base_score(double positive, double negative) { return negative - positive; }

RoundStats aggregate_rounds(std::span<const double> base_scores) {
  if (base_scores.empty()) throw ArgumentError("aggregate_rounds needs at least one round");
  const auto r = static_cast<double>(base_scores.size());
  double sum = 0.0;
  for (double b : base_scores) sum += b;
  RoundStats s;
  s.mean = sum / r;
  double sq = 0.0;
  for (double b : base_scores) sq += (b - s.mean) * (b - s.mean);
  s.std = std::sqrt(sq / r);
  s.y = s.mean + s.std;
  return s;
}

double combine(double y_patch, double y_context, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  return alpha * y_context + (1.0 - alpha) * y_patch;
}

AnomalyReport score_all(const AttributedGraph& g, const ModelParams& params,
                        std::span<const NodeId> nodes, const ScoreConfig& cfg) {
  if (cfg.rounds < 1 || cfg.rounds > kMaxRounds) {
    throw ArgumentError("rounds must lie in [1, " + std::to_string(kMaxRounds) + "]");
  }
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  if (!params.all_finite()) throw NumericError("model parameters contain NaN or Inf");
  if (params.input_dim() != g.feature_dim()) {
    throw ShapeError("model input dimension does not match the graph features");
  }
  const auto n = g.num_nodes();
  if (n < 2) throw ArgumentError("scoring needs at least two nodes for negative pairs");
  for (NodeId v : nodes) {
    if (v >= n) throw RangeError("scored node " + std::to_string(v) + " out of range");
  }

  AnomalyReport report;
  report.rounds = cfg.rounds;
  report.alpha = cfg.alpha;
  report.nodes.resize(nodes.size());

  const std::size_t rounds = cfg.rounds;
  std::vector<Vector> z_patch(nodes.size()), z_context(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t idx) {
    const Vector x = g.features.row(nodes[idx]);
    z_patch[idx] = node_forward(x, params.theta);
    z_context[idx] = node_forward(x, params.phi);
  });

  // Views are keyed by (node, round), so a partner's round-r views are the
  // ones it uses for its own positive pair. Each round embeds every node it
  // needs once.
  std::vector<double> b_patch(nodes.size() * rounds), b_context(nodes.size() * rounds);
  std::vector<NodeId> partner(nodes.size());
  std::vector<std::size_t> slot(n, kUnused);
  std::vector<NodeId> needed;
  std::vector<ViewEmbeddings> views;
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 2));
  for (std::size_t r = 0; r < rounds; ++r) {
    needed.clear();
    auto mark = [&](NodeId v) {
      if (slot[v] == kUnused) {
        slot[v] = needed.size();
        needed.push_back(v);
      }
    };
    for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
      const NodeId v = nodes[idx];
      auto partner_rng = make_rng(cfg.seed, stream::kPartner, v, r);
      NodeId u = pick(partner_rng);
      if (u >= v) ++u;
      partner[idx] = u;
      mark(v);
      mark(u);
    }
    views.resize(needed.size());
    parallel_for(needed.size(),
                 [&](std::size_t j) { views[j] = embed_views(g, params, needed[j], r, cfg); });
    parallel_for(nodes.size(), [&](std::size_t idx) {
      const auto& own = views[slot[nodes[idx]]];
      const auto& other = views[slot[partner[idx]]];
      b_patch[idx * rounds + r] =
          base_score(bilinear_score(own.h_patch, z_patch[idx], params.w_p),
                     bilinear_score(other.h_patch, z_patch[idx], params.w_p));
      b_context[idx * rounds + r] =
          base_score(bilinear_score(own.h_context, z_context[idx], params.w_c),
                     bilinear_score(other.h_context, z_context[idx], params.w_c));
    });
    for (NodeId v : needed) slot[v] = kUnused;
  }

  for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
    const std::span<const double> bp(b_patch.data() + idx * rounds, rounds);
    const std::span<const double> bc(b_context.data() + idx * rounds, rounds);
    for (std::size_t r = 0; r < rounds; ++r) {
      report.positive_base_scores += (bp[r] > 0.0) + (bc[r] > 0.0);
    }
    const auto p = aggregate_rounds(bp);
    const auto c = aggregate_rounds(bc);
    auto& out = report.nodes[idx];
    out.node = nodes[idx];
    out.y_patch = p.y;
    out.y_context = c.y;
    out.mean_b_p = p.mean;
    out.std_b_p = p.std;
    out.mean_b_c = c.mean;
    out.std_b_c = c.std;
    out.y = combine(p.y, c.y, cfg.alpha);
  }
  return report;
}

void save_scores_csv(const std::filesystem::path& path, const AnomalyReport& report) {
  auto out = detail::open_for_write(path);
  out << kScoreHeader << '\n';
  std::string line;
  for (const auto& n : report.nodes) {
    line = std::to_string(n.node);
    for (double v : {n.y, n.y_patch, n.y_context, n.mean_b_p, n.std_b_p, n.mean_b_c, n.std_b_c}) {
      append_field(line, v);
    }
    line.push_back('\n');
    out << line;
  }
  detail::finish_write(out, path);
}

std::vector<NodeReport> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kScoreHeader) {
    throw ParseError(path.string(), 1, "missing or unexpected score CSV header");
  }
  std::vector<NodeReport> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 8) throw ParseError(path.string(), line_no, "expected 8 fields");
    NodeReport r;
    r.node = static_cast<NodeId>(detail::parse_uint(fields[0], path, line_no));
    double* dst[] = {&r.y,       &r.y_patch, &r.y_context, &r.mean_b_p,
                     &r.std_b_p, &r.mean_b_c, &r.std_b_c};
    for (std::size_t i = 0; i < 7; ++i) *dst[i] = detail::parse_double(fields[i + 1], path, line_no);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace anemone
