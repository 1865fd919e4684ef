#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "anemone/rng.hpp"
#include "anemone/types.hpp"

namespace anemone {

// The four trainable matrices: patch encoder, context encoder and the two
// bilinear discriminators.
struct ParamSet {
  Matrix theta;  // D x D'
  Matrix phi;    // D x D'
  Matrix w_p;    // D' x D'
  Matrix w_c;    // D' x D'

  std::array<Matrix*, 4> tensors() { return {&theta, &phi, &w_p, &w_c}; }
  std::array<const Matrix*, 4> tensors() const { return {&theta, &phi, &w_p, &w_c}; }

  std::size_t input_dim() const { return static_cast<std::size_t>(theta.rows()); }
  std::size_t embed_dim() const { return static_cast<std::size_t>(theta.cols()); }
  bool all_finite() const;
  bool same_shape(const ParamSet& other) const;
  void set_zero();

  bool operator==(const ParamSet& other) const;
};

struct ModelParams : ParamSet {
  static ModelParams zeros(std::size_t input_dim, std::size_t embed_dim);
  // Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)), drawn in the order
  // theta, phi, w_p, w_c.
  static ModelParams glorot(std::size_t input_dim, std::size_t embed_dim, Rng& rng);
};

struct Gradients : ParamSet {
  static Gradients zeros_like(const ParamSet& params);
  Gradients& operator+=(const Gradients& other);
};

struct AdamState {
  ParamSet first_moment;
  ParamSet second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState fresh(const ModelParams& params, double learning_rate = 1e-3);
};

// Bias-corrected Adam. Throws NumericError (leaving params and state
// untouched) when any gradient entry is not finite.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

// ---------------------------------------------------------------------------
// Forward kernels. Features are usually sparse bag-of-words rows, so the
// products skip zero feature entries.

// x * w for each row of x.
Matrix feature_product(const Matrix& x, const Matrix& w);

// ReLU(adj_norm * features * weight).
Matrix gcn_forward(const Matrix& adj_norm, const Matrix& features, const Matrix& weight);

// gcn_forward without the checks, for hot loops whose callers validated the
// shapes and weights once up front.
Matrix gcn_propagate(const Matrix& adj_norm, const Matrix& features, const Matrix& weight);

// ReLU(x * weight); equal to gcn_forward on a single node with adj [[1]].
Vector node_forward(const Vector& x, const Matrix& weight);

// Column-wise mean of the rows.
Vector readout(const Matrix& h);

double sigmoid(double x);
double bilinear_logit(const Vector& h, const Vector& z, const Matrix& w);
// sigmoid(h * w * z^T).
double bilinear_score(const Vector& h, const Vector& z, const Matrix& w);

// ---------------------------------------------------------------------------
// Taped forward pass over a batch and its exact backward pass.

enum class Readout {
  kTargetRow,  // h = H[0, :] (patch level)
  kMean,       // h = mean of the rows of H (context level)
};

// Cached intermediates of one target's encoder pass at one scale.
struct EncoderTape {
  Matrix adj_norm;
  SparseRows features;  // K x D, exact zeros dropped
  Matrix pre;           // adj_norm * features * weight, before ReLU
  SparseRows x;         // 1 x D raw target features
  Vector z_pre;         // x * weight, before ReLU
  Vector h;
  Vector z;
};

EncoderTape encode(const Matrix& adj_norm, const Matrix& features, const Vector& x,
                   const Matrix& weight, Readout readout_kind);

// One discriminator evaluation sigmoid(h[h_index] * W * z[z_index]^T).
struct ScorePair {
  std::size_t h_index = 0;
  std::size_t z_index = 0;
};

struct ScaleTape {
  Readout readout_kind = Readout::kTargetRow;
  std::vector<EncoderTape> samples;
  std::vector<ScorePair> pairs;
  std::vector<double> logits;  // filled by score_pairs
};

// Evaluates every pair's logit with discriminator w.
void score_pairs(ScaleTape& tape, const Matrix& w);

struct ForwardTape {
  ScaleTape patch;
  ScaleTape context;
};

// dLoss/dlogit for every scored pair, in tape order.
struct LossGradient {
  std::vector<double> patch;
  std::vector<double> context;
};

// Exact gradients of the loss w.r.t. all four matrices. ReLU uses the
// subgradient 0 at 0. Throws StateError when the tape does not match the loss
// gradient (for example when the forward pass was never recorded).
Gradients backward(const ForwardTape& tape, const LossGradient& grad, const ModelParams& params);

}  // namespace anemone
