#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "anemone/checkpoint.hpp"
#include "anemone/config.hpp"
#include "anemone/contrast.hpp"
#include "anemone/eval.hpp"
#include "anemone/inject.hpp"
#include "anemone/scorer.hpp"

namespace anemone {

// Fixed output layout under the output directory, indexed by run:
//
//   graph/run<r>_edges.txt  graph/run<r>_features.txt  graph/run<r>_labels.txt
//   graph/run<r>_manifest.json
//   checkpoints/run<r>.json  checkpoints/run<r>_loss.csv
//   scores/run<r>.csv
//   eval/run<r>_roc.csv  eval/run<r>_roc.json
//   summary.json
struct ArtifactPaths {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path manifest;
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  std::filesystem::path scores;
  std::filesystem::path roc_csv;
  std::filesystem::path roc_json;
  std::filesystem::path summary;

  static ArtifactPaths under(const std::filesystem::path& out, std::size_t run);
};

// Seed of one pipeline stage, derived from the master seed by stream tag.
std::uint64_t stage_seed(std::uint64_t master, std::string_view stage);

// Loads the graph named by cfg and applies cfg.feature_norm.
AttributedGraph load_input_graph(const PipelineConfig& cfg, bool require_labels);

struct InjectOutcome {
  InjectionResult result;
  ArtifactPaths paths;
};

// Injects anomalies into the clean graph at cfg.edges/features and writes the
// graph files plus a manifest. Features are written as read (unnormalized).
InjectOutcome run_inject(const PipelineConfig& cfg);

struct TrainOutcome {
  TrainResult result;
  Checkpoint checkpoint;
  ArtifactPaths paths;
};

// Trains on cfg's graph; cfg.few_shot > 0 selects few-shot training with a
// k-shot split of the label file. Writes the checkpoint and loss CSV.
TrainOutcome run_train(const PipelineConfig& cfg);

// Scores every node not used as a labeled anomaly by the checkpoint (which is
// cfg.checkpoint, else the run's default). Subgraph size, restart probability
// and feature normalization follow the checkpoint.
AnomalyReport run_score(const PipelineConfig& cfg);

struct EvalOutcome {
  RocCurve curve;
  double auc = 0.0;
};

// AUC of a score CSV (cfg.scores, else the run's default) against the label
// file. Writes the ROC CSV and JSON sidecar.
EvalOutcome run_eval(const PipelineConfig& cfg);

struct RunSummary {
  MultiRunResult aucs;
  nlohmann::json json;
};

// inject (when any anomalies are requested), train, score and eval for each
// of cfg.runs runs, run r using master seed cfg.seed + r. Writes summary.json.
RunSummary run_pipeline(const PipelineConfig& cfg);

struct ConvertSummary {
  std::size_t nodes = 0;
  std::size_t features = 0;
  std::size_t edges = 0;
  std::size_t self_loops_dropped = 0;
};

// Converts a LINQS style export (a .content file of "<id> <f_1..f_D> <class>"
// rows and a .cites file of "<id> <id>" rows, as shipped for Cora) into the
// edge and feature formats. Node ids follow the .content row order; a
// node_ids.txt mapping and classes.txt are written alongside.
ConvertSummary convert_linqs(const std::filesystem::path& content,
                             const std::filesystem::path& cites,
                             const std::filesystem::path& out_dir);

}  // namespace anemone
