#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "anemone/graph.hpp"
#include "anemone/nn.hpp"
#include "anemone/sampler.hpp"

namespace anemone {

enum class TrainMode { kUnsupervised, kFewShot };

// Scores are clamped into [kScoreClamp, 1 - kScoreClamp] before taking logs.
inline constexpr double kScoreClamp = 1e-12;

struct TrainConfig {
  double alpha = 0.8;
  std::size_t batch_size = 300;
  std::size_t epochs = 100;
  std::size_t subgraph_size = 4;
  std::size_t embed_dim = 64;
  double learning_rate = 1e-3;
  double restart_prob = 0.5;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kUnsupervised;
  std::vector<NodeId> labeled_ids;  // few-shot only

  // Throws ArgumentError / ModeError for out-of-range settings.
  void validate(std::size_t num_nodes) const;
};

// One mini-batch worth of augmented views, in batch order.
struct BatchViews {
  std::vector<Subgraph> patch;
  std::vector<Subgraph> context;
  std::vector<Vector> target_features;  // raw (non-anonymized) rows
  std::vector<bool> labeled;            // empty means all unlabeled

  std::size_t size() const { return target_features.size(); }
  bool is_labeled(std::size_t i) const { return !labeled.empty() && labeled[i]; }
};

// Samples both views of every target from the per-(node, view, round)
// streams of `seed`.
BatchViews sample_batch(const AttributedGraph& g, std::span<const NodeId> targets,
                        std::size_t subgraph_size, double restart_prob, std::uint64_t seed,
                        std::uint64_t round);

// Negative partner of every batch position. Unlabeled members pair with the
// next unlabeled member cyclically; when fewer than two members are unlabeled
// the partner is simply (i + 1) mod B. Labeled members get no partner
// (std::nullopt). Throws BatchError when an unlabeled member has nobody to
// pair with (B < 2).
std::vector<std::optional<std::size_t>> negative_partners(const std::vector<bool>& labeled,
                                                          std::size_t batch_size);

struct PairScores {
  std::vector<double> positive;
  std::vector<double> negative;
};

// Patch level: h = row 0 of GCN(view), z = MLP(x), shared theta, scored by
// w_p; the negative for position i uses h of position (i + 1) mod B.
PairScores patch_scores(std::span<const Subgraph> views, std::span<const Vector> targets,
                        const ModelParams& params);

// Context level: h = mean readout of GCN(view) with phi, scored by w_c.
PairScores context_scores(std::span<const Subgraph> views, std::span<const Vector> targets,
                          const ModelParams& params);

struct SelfNegatives {
  std::vector<std::size_t> positions;  // labeled batch positions
  std::vector<double> patch;           // s~_p_self per labeled position
  std::vector<double> context;         // s~_c_self per labeled position
};

// Each labeled anomaly's own (h, z) pair scored as a negative at both
// scales. Throws ModeError in unsupervised mode.
SelfNegatives fs_extra_negatives(const BatchViews& batch, const ModelParams& params,
                                 TrainMode mode);

struct NodeContrast {
  double s_p = 0.0;
  double s_p_neg = 0.0;
  double s_c = 0.0;
  double s_c_neg = 0.0;
  // Present only for labeled anomalies in few-shot mode. Such nodes have no
  // cross negative (s_*_neg is NaN) and s_* equals the self score.
  std::optional<double> s_p_self;
  std::optional<double> s_c_self;

  bool labeled() const { return s_p_self.has_value(); }
};

using ContrastScores = std::vector<NodeContrast>;

struct LossValue {
  double patch = 0.0;
  double context = 0.0;
  double total = 0.0;
};

// L_view = -1/(2B) * sum_i [log s + log(1 - s~)], L = alpha*L_c + (1-alpha)*L_p.
LossValue loss_unsupervised(const ContrastScores& scores, double alpha);

// Unlabeled nodes contribute the unsupervised terms, labeled ones only
// -log(1 - s~_self); both scales are normalised by 1/(2B) with B the full
// batch size.
LossValue loss_few_shot(const ContrastScores& scores, double alpha);

// Taped forward pass over a batch: encoders at both scales plus every scored
// pair (positives, cross negatives, self negatives).
struct BatchForward {
  ForwardTape tape;
  std::vector<std::optional<std::size_t>> partners;
  std::vector<bool> labeled;

  ContrastScores scores() const;
};

BatchForward forward_batch(const BatchViews& batch, const ModelParams& params, TrainMode mode);

// Loss of a taped batch and its gradient with respect to every pair logit.
std::pair<LossValue, LossGradient> loss_and_logit_gradient(const BatchForward& fwd,
                                                           double alpha);

struct BatchLogEntry {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  LossValue loss;
};

struct TrainResult {
  ModelParams params;
  AdamState adam;
  std::vector<BatchLogEntry> log;
  std::vector<double> epoch_mean_loss;  // one per epoch with at least one batch
};

// Optional hook called after every optimiser step.
using TrainObserver = std::function<void(const BatchLogEntry&)>;

// Mini-batch training. Each epoch shuffles all nodes, cuts batches of
// batch_size (the last one may be shorter; size-1 batches are skipped),
// samples two views per node, and applies one Adam step per batch.
TrainResult train(const AttributedGraph& g, const TrainConfig& cfg,
                  const TrainObserver& observer = {});

}  // namespace anemone
