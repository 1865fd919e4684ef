#pragma once

#include <cstdint>

#include "anemone/contrast.hpp"

namespace anemone::testing {

// A tiny random training problem: graph, one sampled batch, parameters,
// loss weight and mode.
struct GradInstance {
  AttributedGraph graph;
  BatchViews batch;
  ModelParams params;
  double alpha = 0.5;
  TrainMode mode = TrainMode::kUnsupervised;
};

// D in 2..5, D' in 2..4, K in 1..4, B in 2..3. Few-shot instances label one
// batch member.
GradInstance make_grad_instance(std::uint64_t seed, TrainMode mode);

double batch_loss(const GradInstance& inst, const ModelParams& params);

struct GradCheck {
  double rel_error = 0.0;
  // Some ReLU pre-activation sits within kKinkMargin of zero without being
  // exactly zero, so central differences may straddle the kink.
  bool near_kink = false;
};

inline constexpr double kKinkMargin = 1e-8;
inline constexpr double kFdStep = 1e-5;
// Denominator floor of the relative error.
inline constexpr double kRelFloor = 1e-8;

// ||analytic - numeric|| / max(||analytic||, ||numeric||, kRelFloor) over all
// four matrices, with central differences of step kFdStep.
GradCheck check_gradient(const GradInstance& inst);

}  // namespace anemone::testing
