#include <functional>
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "fae/errors.hpp"
#include "fae/rng.hpp"
#include "fae/trainer.hpp"
#include "oracles.hpp"

namespace fae {
namespace {

ModelParams small_params(Index m, Index d, std::mt19937_64& gen) {
  return {oracle::random_vector(m, gen, 0.5, 1.0),
          {oracle::random_matrix(m, d, gen), oracle::random_matrix(d, m, gen)}};
}

Gradients zero_grads(const ModelParams& p) {
  return {Vector::Zero(p.w.size()), Matrix::Zero(p.ed.enc.rows(), p.ed.enc.cols()),
          Matrix::Zero(p.ed.dec.rows(), p.ed.dec.cols())};
}

TEST(AdamStep, ZeroGradientLeavesParameters) {
  std::mt19937_64 gen(1);
  ModelParams p = small_params(4, 2, gen);
  const ModelParams before = p;
  AdamState state = AdamState::zeros_like(p);
  for (int i = 0; i < 3; ++i) adam_step(p, zero_grads(p), state, 1e-3);
  EXPECT_EQ(p.w, before.w);
  EXPECT_EQ(p.ed.enc, before.ed.enc);
  EXPECT_EQ(p.ed.dec, before.ed.dec);
  EXPECT_EQ(state.t, 3);
}

TEST(AdamStep, FirstStepMovesByLearningRateAgainstGradientSign) {
  std::mt19937_64 gen(2);
  ModelParams p = small_params(3, 2, gen);
  const ModelParams before = p;
  Gradients g = zero_grads(p);
  g.enc << 0.5, -2.0, 1e-3, -4.0, 3.0, -0.25;
  AdamState state = AdamState::zeros_like(p);
  adam_step(p, g, state, 1e-3);
  // t=1: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  for (Index i = 0; i < g.enc.size(); ++i) {
    const double gi = g.enc.data()[i];
    const double expected = -1e-3 * gi / (std::abs(gi) + 1e-7);
    EXPECT_NEAR(p.ed.enc.data()[i] - before.ed.enc.data()[i], expected, 1e-15);
  }
}

TEST(AdamUpdate, ConvergesOnQuadratic) {
  // f(x) = ||x - c||^2 from x = 0.
  const std::array<double, 2> c = {0.3, -0.2};
  std::array<double, 2> x{}, m{}, v{}, grad{};
  const AdamConfig cfg;
  for (int t = 1; t <= 200; ++t) {
    for (int i = 0; i < 2; ++i) grad[static_cast<std::size_t>(i)] = 2 * (x[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)]);
    adam_update(x, grad, m, v, t, cfg, 0.05);
  }
  EXPECT_NEAR(x[0], c[0], 1e-3);
  EXPECT_NEAR(x[1], c[1], 1e-3);
}

TEST(AdamStep, ProjectsWeightsOntoNonNegativeOrthant) {
  std::mt19937_64 gen(3);
  ModelParams p = small_params(5, 2, gen);
  p.w.setConstant(1e-4);
  Gradients g = zero_grads(p);
  g.w.setConstant(1.0);
  AdamState state = AdamState::zeros_like(p);
  adam_step(p, g, state, 1e-2);
  EXPECT_EQ(p.w, Vector::Zero(5));
}

TEST(AdamStep, RejectsMismatchedShapes) {
  std::mt19937_64 gen(4);
  ModelParams p = small_params(5, 2, gen);
  AdamState state = AdamState::zeros_like(p);
  Gradients g = zero_grads(p);
  g.w.resize(4);
  EXPECT_THROW(adam_step(p, g, state, 1e-3), ContractError);
}

Matrix low_rank_data(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return oracle::random_matrix(n, m, gen, 0.0, 1.0);
}

TEST(TrainFae, ZeroEpochsReturnsInitialization) {
  const Matrix x = low_rank_data(30, 6, 1);
  Hyperparams hp;
  hp.k = 3;
  hp.epochs = 0;
  hp.seed = 77;
  const TrainResult r = train_fae(x, x.topRows(5), hp);
  EXPECT_TRUE(r.report.epochs.empty());
  EXPECT_EQ(r.report.best_epoch, -1);

  SeededRng rng(77);
  EXPECT_EQ(r.params.w, uniform_init(6, kInitLow, kInitHigh, rng));
  EXPECT_EQ(r.params.ed.enc, xavier_normal(6, 3, rng));
  EXPECT_EQ(r.params.ed.dec, xavier_normal(3, 6, rng));
}

TEST(TrainFae, DeterministicForSeed) {
  const Matrix x = low_rank_data(40, 8, 2);
  Hyperparams hp;
  hp.k = 3;
  hp.epochs = 30;
  hp.seed = 5;
  for (Index batch : {Index{0}, Index{7}}) {
    hp.batch = batch;
    const TrainResult a = train_fae(x, x.topRows(8), hp);
    const TrainResult b = train_fae(x, x.topRows(8), hp);
    EXPECT_EQ(a.params.w, b.params.w);
    EXPECT_EQ(a.params.ed.enc, b.params.ed.enc);
    EXPECT_EQ(a.params.ed.dec, b.params.ed.dec);
    ASSERT_EQ(a.report.epochs.size(), b.report.epochs.size());
    for (std::size_t e = 0; e < a.report.epochs.size(); ++e) {
      EXPECT_EQ(a.report.epochs[e].terms, b.report.epochs[e].terms);
      EXPECT_EQ(a.report.epochs[e].total, b.report.epochs[e].total);
      EXPECT_EQ(a.report.epochs[e].val_total, b.report.epochs[e].val_total);
    }
  }
}

TEST(TrainFae, RecoversIdentityWhenEveryFeatureIsKept) {
  // m = d = k: the selected path can reproduce X exactly.
  const Matrix x = low_rank_data(100, 5, 3);
  Hyperparams hp;
  hp.k = hp.d = 5;
  hp.epochs = 500;
  hp.lr = 0.05;
  hp.seed = 1;
  const TrainResult r = train_fae(x, x.topRows(20), hp);
  const auto b = fae_objective(x, r.params.w, r.params.ed, hp);
  EXPECT_LE(b.selected_recon, 1e-3);
  EXPECT_LT(r.report.epochs.back().total, r.report.initial_train_total);
}

TEST(TrainFae, BestEpochHasMinimalValidationTotal) {
  const Matrix x = low_rank_data(60, 10, 4);
  Hyperparams hp;
  hp.k = 4;
  hp.epochs = 80;
  hp.lr = 0.02;
  const TrainResult r = train_fae(x.topRows(50), x.bottomRows(10), hp);
  ASSERT_GE(r.report.best_epoch, 0);
  const double best = r.report.epochs[static_cast<std::size_t>(r.report.best_epoch)].val_total;
  for (const auto& e : r.report.epochs) EXPECT_LE(best, e.val_total);
  // The returned parameters are the best epoch's.
  const double val_at_return = fae_objective(x.bottomRows(10), r.params.w, r.params.ed, hp).total;
  EXPECT_DOUBLE_EQ(val_at_return, best);

  hp.restore_best = false;
  const TrainResult last = train_fae(x.topRows(50), x.bottomRows(10), hp);
  EXPECT_DOUBLE_EQ(fae_objective(x.bottomRows(10), last.params.w, last.params.ed, hp).total,
                   last.report.epochs.back().val_total);
}

TEST(TrainFae, WeightsStayNonNegative) {
  const Matrix x = low_rank_data(40, 12, 5);
  Hyperparams hp;
  hp.k = 3;
  hp.lambda2 = 50.0;  // strong shrinkage drives weights into the constraint
  hp.lr = 0.05;
  hp.restore_best = false;
  for (int epochs : {1, 5, 20, 60}) {
    hp.epochs = epochs;
    const TrainResult r = train_fae(x, x.topRows(5), hp);
    EXPECT_GE(r.params.w.minCoeff(), 0.0) << epochs;
  }
  hp.epochs = 60;
  EXPECT_EQ(train_fae(x, x.topRows(5), hp).params.w.minCoeff(), 0.0);
}

// Every 50-epoch window must be non-increasing for a trial to count.
int monotone_trials(const std::function<TrainResult(std::uint64_t)>& run) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TrainResult r = run(seed);
    bool all = true;
    for (std::size_t s = 0; s + 50 < r.report.epochs.size(); ++s)
      all = all && r.report.epochs[s + 50].total <= r.report.epochs[s].total;
    good += all;
  }
  return good;
}

Hyperparams small_lr(std::uint64_t seed) {
  Hyperparams hp;
  hp.k = 4;
  hp.lr = 1e-4;
  hp.epochs = 200;
  hp.seed = seed;
  return hp;
}

TEST(TrainIae, SoftMonotoneAtSmallLearningRate) {
  const Matrix x = low_rank_data(50, 10, 2024);
  EXPECT_GE(monotone_trials([&](std::uint64_t s) { return train_iae(x, x.topRows(10), small_lr(s)); }), 19);
}

TEST(TrainFae, SoftMonotoneWithFrozenSelection) {
  // Same objective as FAE but the masked term keeps one support throughout.
  const Matrix x = low_rank_data(50, 10, 2024);
  SelectionResult fixed;
  fixed.indices = {1, 4, 6, 8};
  fixed.weights = {1, 1, 1, 1};
  const int good = monotone_trials([&](std::uint64_t s) {
    const Hyperparams hp = small_lr(s);
    return train_composite(
        x, x.topRows(10), hp,
        [&](const FeatureWeights&) {
          CompositeObjective o;
          o.terms = {full_term(1.0), masked_term(fixed, hp.lambda1)};
          o.l1_weight = hp.lambda2;
          o.l1_mode = hp.l1_mode;
          return o;
        },
        true, "fae");
  });
  EXPECT_GE(good, 19);
}

TEST(TrainFae, DivergenceAborts) {
  const Matrix x = low_rank_data(20, 6, 6);
  Hyperparams hp;
  hp.k = 2;
  hp.lr = 1e4;
  hp.epochs = 50;
  try {
    train_fae(x, x.topRows(4), hp);
    FAIL() << "expected divergence";
  } catch (const TrainingError& e) {
    EXPECT_FALSE(e.report().epochs.empty());
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
}

TEST(TrainFae, RejectsBadInputs) {
  const Matrix x = low_rank_data(20, 6, 7);
  Hyperparams hp;
  hp.k = 7;
  EXPECT_THROW(train_fae(x, x, hp), ContractError);
  hp.k = 2;
  EXPECT_THROW(train_fae(x, Matrix::Zero(3, 5), hp), ContractError);
  Matrix bad = x;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(train_fae(bad, x, hp), NumericalError);
}

TEST(TrainIae, ZeroEpochsAndDeterminism) {
  const Matrix x = low_rank_data(30, 6, 8);
  Hyperparams hp;
  hp.k = 3;
  hp.epochs = 0;
  EXPECT_TRUE(train_iae(x, x, hp).report.epochs.empty());
  hp.epochs = 20;
  const TrainResult a = train_iae(x, x, hp);
  const TrainResult b = train_iae(x, x, hp);
  EXPECT_EQ(a.params.w, b.params.w);
  EXPECT_EQ(a.report.epochs.back().total, b.report.epochs.back().total);
  EXPECT_EQ(a.report.epochs.back().terms.size(), 1u);
}

TEST(TrainIae, RecoversIdentityWhenEveryFeatureIsKept) {
  const Matrix x = low_rank_data(100, 5, 9);
  Hyperparams hp;
  hp.k = hp.d = 5;
  hp.epochs = 500;
  hp.lr = 0.1;
  hp.lambda1 = 0.1;
  const TrainResult r = train_iae(x, x.topRows(20), hp);
  const Matrix rec = forward(x, r.params.w, r.params.ed);
  EXPECT_LE(mean_squared(rec - x), 1e-3);
}

TEST(TrainAe, KeepsWeightsFixed) {
  const Matrix x = low_rank_data(30, 6, 10);
  Hyperparams hp;
  hp.k = 3;
  hp.epochs = 20;
  const TrainResult r = train_ae(x, x, hp);
  EXPECT_EQ(r.params.w, Vector::Ones(6));
  EXPECT_LT(r.report.epochs.back().total, r.report.initial_train_total);
  EXPECT_EQ(encoder_norm_ranking(r.params.ed, 3).size(), 3);
}

}  // namespace
}  // namespace fae
