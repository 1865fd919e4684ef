#include "anemone/pipeline.hpp"

#include <cstdio>
#include <string>
#include <unordered_map>

#include "anemone/errors.hpp"
#include "anemone/rng.hpp"
#include "text_io.hpp"

namespace anemone {
namespace {

std::string run_prefix(std::size_t run) { return "run" + std::to_string(run); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = detail::open_for_write(path);
  out << j.dump(2) << '\n';
  detail::finish_write(out, path);
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (path.empty()) throw ArgumentError(std::string("no ") + what + " file given");
  if (!std::filesystem::is_regular_file(path)) {
    throw IoError(std::string(what) + " file not found: " + path.string());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Value of config[section][key] recorded in a checkpoint.
template <typename T>
T recorded(const nlohmann::json& config, const char* section, const char* key) {
  const auto s = config.find(section);
  if (s == config.end() || !s->contains(key)) {
    throw ParseError("checkpoint", 0,
                     std::string("config lacks ") + section + "." + key);
  }
  return (*s)[key].get<T>();
}

}  // namespace

ArtifactPaths ArtifactPaths::under(const std::filesystem::path& out, std::size_t run) {
  const auto r = run_prefix(run);
  ArtifactPaths p;
  p.edges = out / "graph" / (r + "_edges.txt");
  p.features = out / "graph" / (r + "_features.txt");
  p.labels = out / "graph" / (r + "_labels.txt");
  p.manifest = out / "graph" / (r + "_manifest.json");
  p.checkpoint = out / "checkpoints" / (r + ".json");
  p.loss_log = out / "checkpoints" / (r + "_loss.csv");
  p.scores = out / "scores" / (r + ".csv");
  p.roc_csv = out / "eval" / (r + "_roc.csv");
  p.roc_json = out / "eval" / (r + "_roc.json");
  p.summary = out / "summary.json";
  return p;
}

std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
  return derive_seed(master, stage);
}

AttributedGraph load_input_graph(const PipelineConfig& cfg, bool require_labels) {
  require_file(cfg.edges, "edge");
  require_file(cfg.features, "feature");
  if (require_labels && !cfg.labels) throw ArgumentError("a label file is required");
  if (cfg.labels) require_file(*cfg.labels, "label");
  auto g = load_graph(cfg.edges, cfg.features, cfg.labels);
  if (cfg.feature_norm == FeatureNorm::kRow) row_normalize_features(g.features);
  return g;
}

InjectOutcome run_inject(const PipelineConfig& cfg) {
  require_file(cfg.edges, "edge");
  require_file(cfg.features, "feature");
  if (cfg.labels) require_file(*cfg.labels, "label");
  const auto clean = load_graph(cfg.edges, cfg.features, cfg.labels);

  auto spec = cfg.inject;
  spec.seed = stage_seed(cfg.seed, stream::kInject);
  InjectOutcome out{inject_anomalies(clean, spec), ArtifactPaths::under(cfg.out, cfg.run_index)};
  auto& g = out.result.graph;
  if (!g.labels) g.labels = std::vector<int>(g.num_nodes(), 0);
  save_graph(g, out.paths.edges, out.paths.features, out.paths.labels);

  nlohmann::json m;
  m["seed"] = cfg.seed;
  m["injection_seed"] = spec.seed;
  m["num_cliques"] = spec.num_cliques;
  m["clique_size"] = spec.clique_size;
  m["num_contextual"] = spec.num_contextual;
  m["num_candidates"] = spec.num_candidates;
  m["anomaly_ids"] = out.result.anomaly_ids();
  m["structural_ids"] = out.result.structural;
  m["contextual_ids"] = out.result.contextual;
  m["contextual_sources"] = out.result.contextual_sources;
  m["config"] = cfg.to_json();
  write_json(out.paths.manifest, m);

  // Read back what was written.
  const auto check = load_graph(out.paths.edges, out.paths.features, out.paths.labels);
  if (!(check == g)) throw IoError("written graph does not reload identically");
  return out;
}

TrainOutcome run_train(const PipelineConfig& cfg) {
  const auto g = load_input_graph(cfg, cfg.few_shot > 0);

  auto tc = cfg.train;
  tc.seed = stage_seed(cfg.seed, stream::kTrain);
  tc.mode = TrainMode::kUnsupervised;
  tc.labeled_ids.clear();
  if (cfg.few_shot > 0) {
    const auto split = kshot_split(*g.labels, cfg.few_shot, stage_seed(cfg.seed, stream::kSplit));
    tc.mode = TrainMode::kFewShot;
    tc.labeled_ids = split.labeled;
  }

  TrainOutcome out;
  out.paths = ArtifactPaths::under(cfg.out, cfg.run_index);
  {
    auto log = detail::open_for_write(out.paths.loss_log);
    log << "epoch,batch,loss_patch,loss_context,loss_total\n";
    out.result = train(g, tc, [&](const BatchLogEntry& e) {
      log << e.epoch << ',' << e.batch << ',' << format_double(e.loss.patch) << ','
          << format_double(e.loss.context) << ',' << format_double(e.loss.total) << '\n';
    });
    detail::finish_write(log, out.paths.loss_log);
  }

  out.checkpoint.params = out.result.params;
  out.checkpoint.adam = out.result.adam;
  out.checkpoint.labeled_ids = tc.labeled_ids;
  out.checkpoint.config = cfg.to_json();
  out.checkpoint.config["train_seed"] = tc.seed;
  out.checkpoint.config["mode"] = tc.mode == TrainMode::kFewShot ? "few-shot" : "unsupervised";
  save_checkpoint(out.paths.checkpoint, out.checkpoint);

  if (!(load_checkpoint(out.paths.checkpoint).params == out.checkpoint.params)) {
    throw IoError("written checkpoint does not reload identically");
  }
  return out;
}

AnomalyReport run_score(const PipelineConfig& cfg) {
  const auto paths = ArtifactPaths::under(cfg.out, cfg.run_index);
  const auto ckpt_path = cfg.checkpoint.value_or(paths.checkpoint);
  require_file(ckpt_path, "checkpoint");
  const auto ckpt = load_checkpoint(ckpt_path);

  // Sampling and preprocessing must match what the model was trained on.
  auto graph_cfg = cfg;
  graph_cfg.feature_norm =
      parse_feature_norm(recorded<std::string>(ckpt.config, "train", "feature_norm"));
  const auto g = load_input_graph(graph_cfg, false);
  if (g.feature_dim() != ckpt.params.input_dim()) {
    throw ShapeError("graph has " + std::to_string(g.feature_dim()) +
                     " features but the checkpoint expects " +
                     std::to_string(ckpt.params.input_dim()));
  }

  ScoreConfig sc;
  sc.rounds = cfg.rounds;
  sc.alpha = cfg.score_alpha.value_or(recorded<double>(ckpt.config, "train", "alpha"));
  sc.subgraph_size = recorded<std::size_t>(ckpt.config, "train", "subgraph_size");
  sc.restart_prob = recorded<double>(ckpt.config, "train", "restart_prob");
  sc.seed = stage_seed(cfg.seed, stream::kScore);

  std::vector<bool> excluded(g.num_nodes(), false);
  for (NodeId v : ckpt.labeled_ids) {
    if (v >= g.num_nodes()) throw RangeError("checkpoint labels a node outside the graph");
    excluded[v] = true;
  }
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!excluded[v]) nodes.push_back(v);
  }

  auto report = score_all(g, ckpt.params, nodes, sc);
  const auto out_path = cfg.scores.value_or(paths.scores);
  save_scores_csv(out_path, report);
  if (read_scores_csv(out_path).size() != report.nodes.size()) {
    throw IoError("written score file does not reload");
  }
  return report;
}

EvalOutcome run_eval(const PipelineConfig& cfg) {
  const auto paths = ArtifactPaths::under(cfg.out, cfg.run_index);
  const auto score_path = cfg.scores.value_or(paths.scores);
  require_file(score_path, "score");
  if (!cfg.labels) throw ArgumentError("a label file is required");
  require_file(*cfg.labels, "label");

  const auto rows = read_scores_csv(score_path);
  const auto all_labels = read_labels(*cfg.labels);
  std::vector<double> y;
  std::vector<int> labels;
  y.reserve(rows.size());
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.node >= all_labels.size()) {
      throw RangeError("scored node " + std::to_string(r.node) + " has no label");
    }
    y.push_back(r.y);
    labels.push_back(all_labels[r.node]);
  }

  EvalOutcome out;
  out.auc = auc_roc(y, labels);
  out.curve = roc_points(y, labels);
  save_roc_csv(paths.roc_csv, out.curve);
  const double runs[] = {out.auc};
  save_roc_sidecar(paths.roc_json, out.curve, runs);
  return out;
}

RunSummary run_pipeline(const PipelineConfig& cfg) {
  const bool inject = cfg.inject.num_cliques > 0 || cfg.inject.num_contextual > 0;
  if (!inject && !cfg.labels) {
    throw ArgumentError("run needs either anomalies to inject or a label file");
  }

  RunSummary summary;
  summary.aucs = multi_run(cfg.runs, cfg.seed, [&](std::uint64_t seed, std::size_t r) {
    auto rc = cfg;
    rc.seed = seed;
    rc.run_index = r;
    rc.checkpoint.reset();
    rc.scores.reset();
    if (inject) {
      const auto injected = run_inject(rc);
      rc.edges = injected.paths.edges;
      rc.features = injected.paths.features;
      rc.labels = injected.paths.labels;
    }
    run_train(rc);
    run_score(rc);
    return run_eval(rc).auc;
  });

  auto& j = summary.json;
  j["per_run_auc"] = summary.aucs.per_run;
  j["mean_auc"] = summary.aucs.mean;
  j["runs"] = cfg.runs;
  j["seed"] = cfg.seed;
  j["config"] = cfg.to_json();
  write_json(ArtifactPaths::under(cfg.out, 0).summary, j);
  return summary;
}

ConvertSummary convert_linqs(const std::filesystem::path& content,
                             const std::filesystem::path& cites,
                             const std::filesystem::path& out_dir) {
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::string> ids;
  std::vector<std::string> classes;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;

  detail::for_each_data_line(content, [&](std::size_t line_no, std::string_view line) {
    const auto tok = detail::split_whitespace(line);
    if (tok.size() < 3) throw ParseError(content.string(), line_no, "expected id, features, class");
    if (rows.empty()) dim = tok.size() - 2;
    if (tok.size() - 2 != dim) {
      throw ParseError(content.string(), line_no, "feature count differs from the first row");
    }
    const std::string id(tok.front());
    if (!index.emplace(id, static_cast<NodeId>(ids.size())).second) {
      throw ParseError(content.string(), line_no, "duplicate node id '" + id + "'");
    }
    ids.push_back(id);
    classes.emplace_back(tok.back());
    std::vector<double> row(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = detail::parse_double(tok[d + 1], content, line_no);
    }
    rows.push_back(std::move(row));
  });

  ConvertSummary s;
  std::vector<std::pair<NodeId, NodeId>> edges;
  detail::for_each_data_line(cites, [&](std::size_t line_no, std::string_view line) {
    const auto tok = detail::split_whitespace(line);
    if (tok.size() != 2) throw ParseError(cites.string(), line_no, "expected two node ids");
    NodeId ends[2];
    for (int k = 0; k < 2; ++k) {
      const auto it = index.find(std::string(tok[k]));
      if (it == index.end()) {
        throw ParseError(cites.string(), line_no, "unknown node id '" + std::string(tok[k]) + "'");
      }
      ends[k] = it->second;
    }
    if (ends[0] == ends[1]) {
      ++s.self_loops_dropped;
      return;
    }
    edges.emplace_back(ends[0], ends[1]);
  });

  Matrix features(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t d = 0; d < dim; ++d) {
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = rows[r][d];
    }
  }
  const auto adjacency = CsrAdjacency::from_edges(rows.size(), edges);
  save_edges(out_dir / "edges.txt", adjacency);
  save_features(out_dir / "features.txt", features);

  auto write_lines = [](const std::filesystem::path& path, const std::vector<std::string>& v) {
    auto out = detail::open_for_write(path);
    for (const auto& line : v) out << line << '\n';
    detail::finish_write(out, path);
  };
  write_lines(out_dir / "node_ids.txt", ids);
  write_lines(out_dir / "classes.txt", classes);

  s.nodes = rows.size();
  s.features = dim;
  s.edges = adjacency.num_edges();
  return s;
}

}  // namespace anemone
