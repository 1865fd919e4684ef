#include "anemone/nn.hpp"

#include <cmath>
#include <string>

#include "anemone/errors.hpp"
#include "anemone/parallel.hpp"

namespace anemone {
namespace {

// Samples per gradient-accumulation chunk. The partition depends only on the
// batch size, which keeps the reduction order independent of thread count.
constexpr std::size_t kChunkSize = 64;

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

Vector relu_mask(const Vector& pre, const Vector& grad) {
  return (pre.array() > 0.0).select(grad.array(), 0.0).matrix();
}

}  // namespace

bool ParamSet::all_finite() const {
  for (const auto* m : tensors()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

bool ParamSet::same_shape(const ParamSet& other) const {
  const auto a = tensors();
  const auto b = other.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) return false;
  }
  return true;
}

void ParamSet::set_zero() {
  for (auto* m : tensors()) m->setZero();
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!same_shape(other)) return false;
  const auto a = tensors();
  const auto b = other.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (*a[i] != *b[i]) return false;
  }
  return true;
}

ModelParams ModelParams::zeros(std::size_t input_dim, std::size_t embed_dim) {
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto e = static_cast<Eigen::Index>(embed_dim);
  ModelParams p;
  p.theta = Matrix::Zero(d, e);
  p.phi = Matrix::Zero(d, e);
  p.w_p = Matrix::Zero(e, e);
  p.w_c = Matrix::Zero(e, e);
  return p;
}

ModelParams ModelParams::glorot(std::size_t input_dim, std::size_t embed_dim, Rng& rng) {
  auto p = zeros(input_dim, embed_dim);
  for (auto* m : p.tensors()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = u(rng);
  }
  return p;
}

Gradients Gradients::zeros_like(const ParamSet& params) {
  Gradients g;
  auto dst = g.tensors();
  const auto src = params.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    *dst[i] = Matrix::Zero(src[i]->rows(), src[i]->cols());
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  require(same_shape(other), "gradient shapes differ");
  auto dst = tensors();
  const auto src = other.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] += *src[i];
  return *this;
}

AdamState AdamState::fresh(const ModelParams& params, double learning_rate) {
  AdamState s;
  s.first_moment = Gradients::zeros_like(params);
  s.second_moment = Gradients::zeros_like(params);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
  }
  if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");

  const auto t = static_cast<double>(state.step_count + 1);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i]->array() = state.beta1 * m[i]->array() + (1.0 - state.beta1) * g[i]->array();
    v[i]->array() =
        state.beta2 * v[i]->array() + (1.0 - state.beta2) * g[i]->array().square();
    p[i]->array() -= state.learning_rate * (m[i]->array() / c1) /
                     ((v[i]->array() / c2).sqrt() + state.epsilon);
  }
  ++state.step_count;
}

Matrix feature_product(const Matrix& x, const Matrix& w) {
  require(x.cols() == w.rows(), "feature_product: inner dimensions differ");
  Matrix out = Matrix::Zero(x.rows(), w.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      const double v = x(r, d);
      if (v != 0.0) out.row(r).noalias() += v * w.row(d);
    }
  }
  return out;
}

Matrix gcn_forward(const Matrix& adj_norm, const Matrix& features, const Matrix& weight) {
  require(adj_norm.rows() == adj_norm.cols() && adj_norm.cols() == features.rows(),
          "gcn_forward: adjacency does not match feature rows");
  require(features.cols() == weight.rows(), "gcn_forward: feature/weight mismatch");
  if (!adj_norm.allFinite() || !features.allFinite() || !weight.allFinite()) {
    throw NumericError("gcn_forward: non-finite input");
  }
  return gcn_propagate(adj_norm, features, weight);
}

Matrix gcn_propagate(const Matrix& adj_norm, const Matrix& features, const Matrix& weight) {
  return (adj_norm * feature_product(features, weight)).cwiseMax(0.0);
}

Vector node_forward(const Vector& x, const Matrix& weight) {
  require(x.size() == weight.rows(), "node_forward: feature/weight mismatch");
  return feature_product(x, weight).cwiseMax(0.0);
}

Vector readout(const Matrix& h) {
  if (h.rows() == 0) throw ArgumentError("readout of an empty embedding matrix");
  return h.colwise().mean();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bilinear_logit(const Vector& h, const Vector& z, const Matrix& w) {
  require(h.size() == w.rows() && z.size() == w.cols(), "bilinear: shape mismatch");
  return h.dot(z * w.transpose());
}

double bilinear_score(const Vector& h, const Vector& z, const Matrix& w) {
  return sigmoid(bilinear_logit(h, z, w));
}

EncoderTape encode(const Matrix& adj_norm, const Matrix& features, const Vector& x,
                   const Matrix& weight, Readout readout_kind) {
  require(adj_norm.rows() == adj_norm.cols() && adj_norm.cols() == features.rows(),
          "encode: adjacency does not match feature rows");
  require(features.cols() == weight.rows() && x.size() == weight.rows(),
          "encode: feature/weight mismatch");
  EncoderTape t;
  t.adj_norm = adj_norm;
  t.features = features.sparseView();
  t.x = x.sparseView();
  t.pre = adj_norm * (t.features * weight);
  t.z_pre = t.x * weight;
  const Matrix h_all = t.pre.cwiseMax(0.0);
  t.h = readout_kind == Readout::kMean ? readout(h_all) : Vector(h_all.row(0));
  t.z = t.z_pre.cwiseMax(0.0);
  return t;
}

void score_pairs(ScaleTape& tape, const Matrix& w) {
  tape.logits.resize(tape.pairs.size());
  for (std::size_t k = 0; k < tape.pairs.size(); ++k) {
    const auto& pr = tape.pairs[k];
    if (pr.h_index >= tape.samples.size() || pr.z_index >= tape.samples.size()) {
      throw RangeError("score pair references a missing sample");
    }
    tape.logits[k] =
        bilinear_logit(tape.samples[pr.h_index].h, tape.samples[pr.z_index].z, w);
  }
}

namespace {

// Gradients w.r.t. each sample's h and z plus the discriminator weight.
struct EmbeddingGrads {
  std::vector<Vector> dh;
  std::vector<Vector> dz;
};

EmbeddingGrads backward_discriminator(const ScaleTape& tape, const std::vector<double>& dlogit,
                                      const Matrix& w, Matrix& dw) {
  const auto e = w.rows();
  EmbeddingGrads out;
  out.dh.assign(tape.samples.size(), Vector::Zero(e));
  out.dz.assign(tape.samples.size(), Vector::Zero(e));
  for (std::size_t k = 0; k < tape.pairs.size(); ++k) {
    const double g = dlogit[k];
    if (g == 0.0) continue;
    const auto& pr = tape.pairs[k];
    const auto& h = tape.samples[pr.h_index].h;
    const auto& z = tape.samples[pr.z_index].z;
    dw.noalias() += g * (h.transpose() * z);
    out.dh[pr.h_index].noalias() += g * (z * w.transpose());
    out.dz[pr.z_index].noalias() += g * (h * w);
  }
  return out;
}

void backward_encoder(const EncoderTape& t, Readout kind, const Vector& dh, const Vector& dz,
                      Matrix& dweight) {
  const auto k = t.pre.rows();
  Matrix dh_all = Matrix::Zero(k, t.pre.cols());
  if (kind == Readout::kMean) {
    dh_all.rowwise() = dh / static_cast<double>(k);
  } else {
    dh_all.row(0) = dh;
  }
  const Matrix dpre = (t.pre.array() > 0.0).select(dh_all.array(), 0.0).matrix();
  const Matrix du = t.adj_norm.transpose() * dpre;
  dweight.noalias() += t.features.transpose() * du;
  const Vector dz_pre = relu_mask(t.z_pre, dz);
  for (SparseRows::InnerIterator it(t.x, 0); it; ++it) {
    dweight.row(it.index()).noalias() += it.value() * dz_pre;
  }
}

}  // namespace

Gradients backward(const ForwardTape& tape, const LossGradient& grad, const ModelParams& params) {
  if (grad.patch.size() != tape.patch.pairs.size() ||
      grad.context.size() != tape.context.pairs.size() ||
      tape.patch.logits.size() != tape.patch.pairs.size() ||
      tape.context.logits.size() != tape.context.pairs.size()) {
    throw StateError("backward: no matching forward tape for this loss gradient");
  }
  auto out = Gradients::zeros_like(params);
  const auto patch = backward_discriminator(tape.patch, grad.patch, params.w_p, out.w_p);
  const auto context = backward_discriminator(tape.context, grad.context, params.w_c, out.w_c);

  const std::size_t n = std::max(tape.patch.samples.size(), tape.context.samples.size());
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Matrix> d_theta(chunks), d_phi(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    d_theta[c] = Matrix::Zero(params.theta.rows(), params.theta.cols());
    d_phi[c] = Matrix::Zero(params.phi.rows(), params.phi.cols());
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      if (i < tape.patch.samples.size()) {
        backward_encoder(tape.patch.samples[i], tape.patch.readout_kind, patch.dh[i],
                         patch.dz[i], d_theta[c]);
      }
      if (i < tape.context.samples.size()) {
        backward_encoder(tape.context.samples[i], tape.context.readout_kind, context.dh[i],
                         context.dz[i], d_phi[c]);
      }
    }
  });
  for (std::size_t c = 0; c < chunks; ++c) {
    out.theta += d_theta[c];
    out.phi += d_phi[c];
  }
  return out;
}

}  // namespace anemone
