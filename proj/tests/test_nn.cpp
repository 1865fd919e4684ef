#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "anemone/errors.hpp"
#include "anemone/nn.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace anemone {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(GcnForward, ZeroWeightGivesZero) {
  const Matrix a = Matrix::Identity(3, 3);
  const Matrix x = random_matrix(3, 4, 1);
  EXPECT_TRUE(gcn_forward(a, x, Matrix::Zero(4, 2)).isZero(0.0));
}

TEST(GcnForward, SingleNodeIsReluOfProduct) {
  Matrix a(1, 1);
  a << 1.0;
  Matrix x(1, 2);
  x << 1.0, -2.0;
  Matrix w(2, 2);
  w << 1.0, 1.0, 1.0, -1.0;
  const auto h = gcn_forward(a, x, w);
  EXPECT_DOUBLE_EQ(h(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 3.0);
}

TEST(GcnForward, MatchesTripleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix adj = random_matrix(4, 4, seed).cwiseAbs();
    const Matrix x = random_matrix(4, 3, seed + 100);
    const Matrix w = random_matrix(3, 5, seed + 200);
    const auto got = gcn_forward(adj, x, w);
    EXPECT_LT((got - oracle::relu_gcn(adj, x, w)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_GE(got.minCoeff(), 0.0);
  }
}

TEST(GcnForward, ShapeAndNumericErrors) {
  const Matrix a = Matrix::Identity(2, 2);
  EXPECT_THROW(gcn_forward(a, Matrix::Zero(3, 2), Matrix::Zero(2, 2)), ShapeError);
  EXPECT_THROW(gcn_forward(a, Matrix::Zero(2, 3), Matrix::Zero(2, 2)), ShapeError);
  Matrix w = Matrix::Zero(2, 2);
  w(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(gcn_forward(a, Matrix::Zero(2, 2), w), NumericError);
}

TEST(NodeForward, EqualsGcnOnOneNodeGraph) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = random_matrix(1, 6, seed);
    const Matrix w = random_matrix(6, 3, seed + 50);
    const Vector z = node_forward(x.row(0), w);
    const Matrix h = gcn_forward(Matrix::Ones(1, 1), x, w);
    EXPECT_EQ(z, Vector(h.row(0)));
    EXPECT_LT((z - oracle::relu_row(x.row(0), w)).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_TRUE(node_forward(Vector::Zero(3), random_matrix(3, 2, 1)).isZero(0.0));
  EXPECT_THROW(node_forward(Vector::Zero(2), Matrix::Zero(3, 2)), ShapeError);
}

TEST(Readout, Examples) {
  Matrix h(2, 2);
  h << 1, 0, 0, 1;
  EXPECT_EQ(readout(h), (Vector(2) << 0.5, 0.5).finished());
  const Matrix same = Matrix::Constant(4, 3, 2.5);
  EXPECT_EQ(readout(same), Vector::Constant(3, 2.5));
  const Matrix r = random_matrix(4, 64, 3);
  EXPECT_LT((readout(r) - oracle::column_mean(r)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(readout(Matrix(0, 3)), ArgumentError);
}

TEST(Bilinear, Examples) {
  const Vector h = (Vector(2) << 1, 0).finished();
  const Vector z = (Vector(2) << 0, 1).finished();
  Matrix w(2, 2);
  w << 0, 2, 0, 0;
  EXPECT_NEAR(bilinear_score(h, z, w), 0.8807970779778823, 1e-15);
  EXPECT_DOUBLE_EQ(bilinear_score(h, z, Matrix::Zero(2, 2)), 0.5);
  EXPECT_DOUBLE_EQ(bilinear_score(Vector::Zero(2), z, w), 0.5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vector a = random_matrix(1, 4, seed).row(0);
    const Vector b = random_matrix(1, 4, seed + 1).row(0);
    const Matrix m = random_matrix(4, 4, seed + 2);
    const double s = bilinear_score(a, b, m);
    EXPECT_NEAR(s, oracle::bilinear(a, m, b), 1e-14);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(Glorot, BoundsAndDeterminism) {
  auto r1 = make_rng(3, stream::kInit);
  auto r2 = make_rng(3, stream::kInit);
  const auto a = ModelParams::glorot(10, 4, r1);
  const auto b = ModelParams::glorot(10, 4, r2);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.theta.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 14.0));
  EXPECT_LE(a.w_p.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 8.0));
  EXPECT_EQ(a.theta.rows(), 10);
  EXPECT_EQ(a.w_c.cols(), 4);
  EXPECT_FALSE(a.theta == a.phi);
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  auto rng = make_rng(1, "adam");
  auto p = ModelParams::glorot(3, 2, rng);
  const auto before = p;
  auto state = AdamState::fresh(p, 0.01);
  state.first_moment.theta.setConstant(0.5);
  adam_step(p, Gradients::zeros_like(p), state);
  EXPECT_EQ(state.step_count, 1u);
  EXPECT_DOUBLE_EQ(state.first_moment.theta(0, 0), 0.45);
  // Decayed first moment still moves theta, the other matrices stay put.
  EXPECT_EQ(p.phi, before.phi);
  EXPECT_EQ(p.w_p, before.w_p);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto rng = make_rng(2, "adam");
  auto p = ModelParams::glorot(3, 2, rng);
  const auto before = p;
  auto state = AdamState::fresh(p, 1e-3);
  auto g = Gradients::zeros_like(p);
  g.theta.setConstant(0.3);
  g.w_c.setConstant(-2.0);
  adam_step(p, g, state);
  const Matrix dtheta = p.theta - before.theta;
  const Matrix dwc = p.w_c - before.w_c;
  for (Eigen::Index i = 0; i < dtheta.size(); ++i) EXPECT_NEAR(dtheta.data()[i], -1e-3, 1e-9);
  for (Eigen::Index i = 0; i < dwc.size(); ++i) EXPECT_NEAR(dwc.data()[i], 1e-3, 1e-9);
  EXPECT_EQ(p.phi, before.phi);
}

TEST(Adam, DescendsQuadratic) {
  auto rng = make_rng(3, "adam");
  auto p = ModelParams::glorot(4, 3, rng);
  auto state = AdamState::fresh(p, 0.05);
  auto energy = [](const ModelParams& m) {
    double e = 0.0;
    for (const Matrix* t : m.tensors()) e += 0.5 * t->squaredNorm();
    return e;
  };
  const double start = energy(p);
  for (int i = 0; i < 200; ++i) {
    Gradients g;
    static_cast<ParamSet&>(g) = p;
    adam_step(p, g, state);
  }
  EXPECT_LT(energy(p), 0.05 * start);
}

TEST(Adam, NonFiniteGradientRejectedWithoutSideEffects) {
  auto rng = make_rng(4, "adam");
  auto p = ModelParams::glorot(3, 2, rng);
  const auto before = p;
  auto state = AdamState::fresh(p, 1e-3);
  auto g = Gradients::zeros_like(p);
  g.w_p(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(adam_step(p, g, state), NumericError);
  EXPECT_EQ(p, before);
  EXPECT_EQ(state.step_count, 0u);
  EXPECT_TRUE(state.first_moment.w_p.isZero(0.0));
}

TEST(Backward, ZeroLossGradientGivesZeroGradients) {
  const auto inst = testing::make_grad_instance(2, TrainMode::kFewShot);
  const auto fwd = forward_batch(inst.batch, inst.params, inst.mode);
  LossGradient zero;
  zero.patch.assign(fwd.tape.patch.pairs.size(), 0.0);
  zero.context.assign(fwd.tape.context.pairs.size(), 0.0);
  const auto g = backward(fwd.tape, zero, inst.params);
  for (const Matrix* t : g.tensors()) EXPECT_TRUE(t->isZero(0.0));
}

TEST(Backward, MissingTapeIsStateError) {
  const auto inst = testing::make_grad_instance(4, TrainMode::kUnsupervised);
  const auto fwd = forward_batch(inst.batch, inst.params, inst.mode);
  const auto grad = loss_and_logit_gradient(fwd, inst.alpha).second;
  EXPECT_THROW(backward(ForwardTape{}, grad, inst.params), StateError);
}

TEST(Backward, MatchesFiniteDifferences) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto mode = seed % 2 ? TrainMode::kFewShot : TrainMode::kUnsupervised;
    const auto inst = testing::make_grad_instance(seed, mode);
    const auto r = testing::check_gradient(inst);
    if (r.near_kink) continue;
    ++checked;
    EXPECT_LT(r.rel_error, 1e-4) << "seed " << seed;
  }
  EXPECT_GE(checked, 30);
}

// A descent step on the positive term alone raises the positive score; on
// the negative term alone it lowers the negative score.
TEST(Backward, DescentDirectionSigns) {
  const auto inst = testing::make_grad_instance(6, TrainMode::kUnsupervised);
  for (bool positive : {true, false}) {
    auto fwd = forward_batch(inst.batch, inst.params, TrainMode::kUnsupervised);
    const std::size_t pair = positive ? 0 : 1;
    const double s = sigmoid(fwd.tape.patch.logits[pair]);
    LossGradient g;
    g.patch.assign(fwd.tape.patch.pairs.size(), 0.0);
    g.context.assign(fwd.tape.context.pairs.size(), 0.0);
    g.patch[pair] = positive ? s - 1.0 : s;
    const auto grads = backward(fwd.tape, g, inst.params);
    auto moved = inst.params;
    moved.w_p -= 1e-3 * grads.w_p;
    moved.theta -= 1e-3 * grads.theta;
    const auto after = forward_batch(inst.batch, moved, TrainMode::kUnsupervised);
    const double s2 = sigmoid(after.tape.patch.logits[pair]);
    if (positive) EXPECT_GE(s2, s); else EXPECT_LE(s2, s);
  }
}

}  // namespace
}  // namespace anemone
