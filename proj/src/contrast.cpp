#include "anemone/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "anemone/errors.hpp"
#include "anemone/parallel.hpp"
#include "anemone/rng.hpp"

namespace anemone {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class PairRole { kPositive, kNegative, kSelfNegative };

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
}

ScaleTape encode_scale(std::span<const Subgraph> views, std::span<const Vector> targets,
                       const Matrix& weight, Readout kind) {
  if (views.size() != targets.size()) {
    throw ShapeError("number of views and target feature rows differ");
  }
  ScaleTape tape;
  tape.readout_kind = kind;
  tape.samples.resize(views.size());
  parallel_for(views.size(), [&](std::size_t i) {
    tape.samples[i] = encode(views[i].adj_norm, views[i].features, targets[i], weight, kind);
  });
  return tape;
}

PairScores score_unsupervised(ScaleTape tape, const Matrix& w) {
  const auto n = tape.samples.size();
  if (n < 2) throw BatchError("a batch needs at least two nodes to form negatives");
  for (std::size_t i = 0; i < n; ++i) tape.pairs.push_back({i, i});
  for (std::size_t i = 0; i < n; ++i) tape.pairs.push_back({(i + 1) % n, i});
  score_pairs(tape, w);
  PairScores out;
  for (std::size_t i = 0; i < n; ++i) {
    out.positive.push_back(sigmoid(tape.logits[i]));
    out.negative.push_back(sigmoid(tape.logits[n + i]));
  }
  return out;
}

// Sum over nodes of log s + log(1 - s~) (or log(1 - s~_self) for labeled
// anomalies), in batch order.
double log_likelihood(const ContrastScores& scores, bool patch) {
  double sum = 0.0;
  for (const auto& n : scores) {
    if (n.labeled()) {
      sum += std::log(1.0 - clamp_score(patch ? *n.s_p_self : *n.s_c_self));
    } else {
      sum += std::log(clamp_score(patch ? n.s_p : n.s_c)) +
             std::log(1.0 - clamp_score(patch ? n.s_p_neg : n.s_c_neg));
    }
  }
  return sum;
}

LossValue combine_loss(const ContrastScores& scores, double alpha) {
  check_alpha(alpha);
  if (scores.empty()) throw BatchError("loss of an empty batch");
  const double scale = -1.0 / (2.0 * static_cast<double>(scores.size()));
  LossValue v;
  v.patch = scale * log_likelihood(scores, true);
  v.context = scale * log_likelihood(scores, false);
  v.total = alpha * v.context + (1.0 - alpha) * v.patch;
  return v;
}

// Pair layout shared by both scales: per position, either (positive,
// negative) or a single self negative.
struct PairPlan {
  std::vector<ScorePair> pairs;
  std::vector<PairRole> roles;
  std::vector<std::size_t> owners;
};

PairPlan plan_pairs(const std::vector<std::optional<std::size_t>>& partners) {
  PairPlan plan;
  for (std::size_t i = 0; i < partners.size(); ++i) {
    if (partners[i]) {
      plan.pairs.push_back({i, i});
      plan.roles.push_back(PairRole::kPositive);
      plan.owners.push_back(i);
      plan.pairs.push_back({*partners[i], i});
      plan.roles.push_back(PairRole::kNegative);
      plan.owners.push_back(i);
    } else {
      plan.pairs.push_back({i, i});
      plan.roles.push_back(PairRole::kSelfNegative);
      plan.owners.push_back(i);
    }
  }
  return plan;
}

}  // namespace

void TrainConfig::validate(std::size_t num_nodes) const {
  check_alpha(alpha);
  if (batch_size < 2) throw ArgumentError("batch size must be at least 2");
  if (subgraph_size < 1) throw ArgumentError("subgraph size must be at least 1");
  if (embed_dim < 1) throw ArgumentError("embedding dimension must be at least 1");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(restart_prob > 0.0 && restart_prob < 1.0)) {
    throw ArgumentError("restart probability must lie in (0, 1)");
  }
  if (mode == TrainMode::kFewShot) {
    if (labeled_ids.empty()) throw ModeError("few-shot training needs labeled anomalies");
    if (labeled_ids.size() >= num_nodes) {
      throw ArgumentError("few-shot labeled set must be a small subset of the nodes");
    }
    for (NodeId v : labeled_ids) {
      if (v >= num_nodes) throw RangeError("labeled node " + std::to_string(v) + " out of range");
    }
  } else if (!labeled_ids.empty()) {
    throw ModeError("labeled anomalies given in unsupervised mode");
  }
}

BatchViews sample_batch(const AttributedGraph& g, std::span<const NodeId> targets,
                        std::size_t subgraph_size, double restart_prob, std::uint64_t seed,
                        std::uint64_t round) {
  BatchViews batch;
  const auto n = targets.size();
  batch.patch.resize(n);
  batch.context.resize(n);
  batch.target_features.resize(n);
  parallel_for(n, [&](std::size_t i) {
    const NodeId v = targets[i];
    auto patch_rng = make_rng(seed, stream::kPatchView, v, round);
    auto context_rng = make_rng(seed, stream::kContextView, v, round);
    batch.patch[i] = rwr_sample(g, v, subgraph_size, restart_prob, patch_rng);
    batch.context[i] = rwr_sample(g, v, subgraph_size, restart_prob, context_rng);
    batch.target_features[i] = g.features.row(v);
  });
  return batch;
}

std::vector<std::optional<std::size_t>> negative_partners(const std::vector<bool>& labeled,
                                                          std::size_t batch_size) {
  if (!labeled.empty() && labeled.size() != batch_size) {
    throw ShapeError("label flags do not match the batch size");
  }
  auto is_labeled = [&](std::size_t i) { return !labeled.empty() && labeled[i]; };
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < batch_size; ++i) {
    if (!is_labeled(i)) unlabeled.push_back(i);
  }
  if (!unlabeled.empty() && batch_size < 2) {
    throw BatchError("an unlabeled node needs at least one other batch member as negative");
  }
  std::vector<std::optional<std::size_t>> out(batch_size);
  for (std::size_t u = 0; u < unlabeled.size(); ++u) {
    const auto i = unlabeled[u];
    out[i] = unlabeled.size() >= 2 ? unlabeled[(u + 1) % unlabeled.size()]
                                   : (i + 1) % batch_size;
  }
  return out;
}

PairScores patch_scores(std::span<const Subgraph> views, std::span<const Vector> targets,
                        const ModelParams& params) {
  return score_unsupervised(encode_scale(views, targets, params.theta, Readout::kTargetRow),
                            params.w_p);
}

PairScores context_scores(std::span<const Subgraph> views, std::span<const Vector> targets,
                          const ModelParams& params) {
  return score_unsupervised(encode_scale(views, targets, params.phi, Readout::kMean),
                            params.w_c);
}

SelfNegatives fs_extra_negatives(const BatchViews& batch, const ModelParams& params,
                                 TrainMode mode) {
  if (mode != TrainMode::kFewShot) {
    throw ModeError("extra negatives exist only in few-shot mode");
  }
  SelfNegatives out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch.is_labeled(i)) continue;
    const auto& x = batch.target_features[i];
    const auto p = encode(batch.patch[i].adj_norm, batch.patch[i].features, x, params.theta,
                          Readout::kTargetRow);
    const auto c = encode(batch.context[i].adj_norm, batch.context[i].features, x, params.phi,
                          Readout::kMean);
    out.positions.push_back(i);
    out.patch.push_back(bilinear_score(p.h, p.z, params.w_p));
    out.context.push_back(bilinear_score(c.h, c.z, params.w_c));
  }
  return out;
}

LossValue loss_unsupervised(const ContrastScores& scores, double alpha) {
  for (const auto& n : scores) {
    if (n.labeled()) throw ModeError("labeled anomaly passed to the unsupervised loss");
  }
  return combine_loss(scores, alpha);
}

LossValue loss_few_shot(const ContrastScores& scores, double alpha) {
  return combine_loss(scores, alpha);
}

BatchForward forward_batch(const BatchViews& batch, const ModelParams& params, TrainMode mode) {
  const auto n = batch.size();
  if (n == 0) throw BatchError("empty batch");
  if (batch.patch.size() != n || batch.context.size() != n) {
    throw ShapeError("batch views and targets differ in length");
  }
  BatchForward fwd;
  fwd.labeled.assign(n, false);
  if (mode == TrainMode::kFewShot) {
    for (std::size_t i = 0; i < n; ++i) fwd.labeled[i] = batch.is_labeled(i);
  }
  fwd.partners = negative_partners(fwd.labeled, n);

  fwd.tape.patch = encode_scale(batch.patch, batch.target_features, params.theta,
                                Readout::kTargetRow);
  fwd.tape.context = encode_scale(batch.context, batch.target_features, params.phi,
                                  Readout::kMean);
  const auto plan = plan_pairs(fwd.partners);
  fwd.tape.patch.pairs = plan.pairs;
  fwd.tape.context.pairs = plan.pairs;
  score_pairs(fwd.tape.patch, params.w_p);
  score_pairs(fwd.tape.context, params.w_c);
  return fwd;
}

ContrastScores BatchForward::scores() const {
  const auto plan = plan_pairs(partners);
  ContrastScores out(partners.size());
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    auto& node = out[plan.owners[k]];
    const double sp = sigmoid(tape.patch.logits[k]);
    const double sc = sigmoid(tape.context.logits[k]);
    switch (plan.roles[k]) {
      case PairRole::kPositive:
        node.s_p = sp;
        node.s_c = sc;
        break;
      case PairRole::kNegative:
        node.s_p_neg = sp;
        node.s_c_neg = sc;
        break;
      case PairRole::kSelfNegative:
        node.s_p = sp;
        node.s_c = sc;
        node.s_p_neg = kNaN;
        node.s_c_neg = kNaN;
        node.s_p_self = sp;
        node.s_c_self = sc;
        break;
    }
  }
  return out;
}

std::pair<LossValue, LossGradient> loss_and_logit_gradient(const BatchForward& fwd,
                                                           double alpha) {
  const auto loss = loss_few_shot(fwd.scores(), alpha);
  const auto plan = plan_pairs(fwd.partners);
  const double scale = 1.0 / (2.0 * static_cast<double>(fwd.partners.size()));

  // d/da of -log clamp(sigmoid(a)) and -log(1 - clamp(sigmoid(a))); the clamp
  // is flat outside its range.
  auto dlogit = [&](double logit, PairRole role) {
    const double s = sigmoid(logit);
    if (s < kScoreClamp || s > 1.0 - kScoreClamp) return 0.0;
    return role == PairRole::kPositive ? scale * (s - 1.0) : scale * s;
  };
  LossGradient grad;
  grad.patch.resize(plan.pairs.size());
  grad.context.resize(plan.pairs.size());
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    grad.patch[k] = (1.0 - alpha) * dlogit(fwd.tape.patch.logits[k], plan.roles[k]);
    grad.context[k] = alpha * dlogit(fwd.tape.context.logits[k], plan.roles[k]);
  }
  return {loss, grad};
}

TrainResult train(const AttributedGraph& g, const TrainConfig& cfg,
                  const TrainObserver& observer) {
  g.validate();
  cfg.validate(g.num_nodes());

  TrainResult result;
  auto init_rng = make_rng(cfg.seed, stream::kInit);
  result.params = ModelParams::glorot(g.feature_dim(), cfg.embed_dim, init_rng);
  result.adam = AdamState::fresh(result.params, cfg.learning_rate);

  std::vector<bool> is_labeled(g.num_nodes(), false);
  for (NodeId v : cfg.labeled_ids) is_labeled[v] = true;

  std::vector<NodeId> order(g.num_nodes());
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), NodeId{0});
    auto shuffle_rng = make_rng(cfg.seed, stream::kShuffle, e);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_sum = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      const auto end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < 2) continue;
      const std::span<const NodeId> targets(order.data() + start, end - start);

      auto batch = sample_batch(g, targets, cfg.subgraph_size, cfg.restart_prob, cfg.seed, e);
      if (cfg.mode == TrainMode::kFewShot) {
        batch.labeled.resize(targets.size());
        for (std::size_t i = 0; i < targets.size(); ++i) {
          batch.labeled[i] = is_labeled[targets[i]];
        }
      }
      try {
        const auto fwd = forward_batch(batch, result.params, cfg.mode);
        const auto [loss, dlogits] = loss_and_logit_gradient(fwd, cfg.alpha);
        if (!std::isfinite(loss.total)) throw NumericError("non-finite loss");
        const auto grads = backward(fwd.tape, dlogits, result.params);
        adam_step(result.params, grads, result.adam);

        BatchLogEntry entry{e, b, loss};
        result.log.push_back(entry);
        if (observer) observer(entry);
        epoch_sum += loss.total;
        ++epoch_batches;
      } catch (const NumericError& err) {
        throw NumericError("epoch " + std::to_string(e) + " batch " + std::to_string(b) +
                           ": " + err.what());
      }
    }
    if (epoch_batches > 0) {
      result.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(epoch_batches));
    }
  }
  return result;
}

}  // namespace anemone
