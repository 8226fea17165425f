#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fae/errors.hpp"
#include "fae/model.hpp"
#include "oracles.hpp"

namespace fae {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

EncoderDecoder random_ed(Index m, Index d, std::mt19937_64& gen) {
  return {oracle::random_matrix(m, d, gen, -0.5, 0.5), oracle::random_matrix(d, m, gen, -0.5, 0.5)};
}

TEST(TopkMask, PicksLargestInDescendingOrder) {
  const auto sel = topk_mask(vec({0.3, 0.1, 0.5}), 2);
  EXPECT_EQ(sel.indices, (std::vector<Index>{2, 0}));
  EXPECT_EQ(sel.weights, (std::vector<double>{0.5, 0.3}));
}

TEST(TopkMask, TiesBreakByLowerIndex) {
  EXPECT_EQ(topk_mask(vec({0.4, 0.4, 0.4}), 2).indices, (std::vector<Index>{0, 1}));
  // Fewer than k nonzero weights: zeros still fill the selection.
  EXPECT_EQ(topk_mask(vec({0.0, 2.0, 0.0, 0.0}), 3).indices, (std::vector<Index>{1, 0, 2}));
}

TEST(TopkMask, RejectsBadK) {
  EXPECT_THROW(topk_mask(vec({1, 2}), 3), ContractError);
  EXPECT_THROW(topk_mask(vec({1, 2}), 0), ContractError);
}

TEST(TopkMask, MatchesFullSortOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector w = oracle::random_vector(100, gen, 0.0, 1.0);
    const Vector expected = oracle::sort_topk_mask(w, 10);
    EXPECT_EQ(mask_vector(topk_mask(w, 10), 100), expected);
  }
}

TEST(TopkMask, PermutationEquivariant) {
  std::mt19937_64 gen(18);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 40;
    const Vector w = oracle::random_vector(m, gen, 0.0, 1.0);
    std::vector<Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    Vector permuted(m);
    for (Index j = 0; j < m; ++j) permuted[perm[static_cast<std::size_t>(j)]] = w[j];

    std::set<Index> expected;
    for (Index j : topk_mask(w, 7).indices) expected.insert(perm[static_cast<std::size_t>(j)]);
    const auto got = topk_mask(permuted, 7).indices;
    EXPECT_EQ(std::set<Index>(got.begin(), got.end()), expected);
  }
}

TEST(Forward, ZeroWeightsGiveZero) {
  std::mt19937_64 gen(1);
  const Matrix x = oracle::random_matrix(4, 3, gen);
  EXPECT_EQ(forward(x, Vector::Zero(3), random_ed(3, 2, gen)), Matrix::Zero(4, 3));
}

TEST(Forward, IdentityPipelineReturnsInput) {
  std::mt19937_64 gen(2);
  const Matrix x = oracle::random_matrix(5, 4, gen);
  const EncoderDecoder ed{Matrix::Identity(4, 4), Matrix::Identity(4, 4)};
  EXPECT_EQ(forward(x, Vector::Ones(4), ed), x);
}

TEST(Forward, MatchesFourFactorProduct) {
  std::mt19937_64 gen(3);
  const Matrix x = oracle::random_matrix(6, 5, gen);
  const Vector w = oracle::random_vector(5, gen, 0.0, 2.0);
  const auto ed = random_ed(5, 3, gen);
  const Vector mask = vec({1, 0, 1, 1, 0});
  Matrix diag = Matrix::Zero(5, 5);
  for (Index j = 0; j < 5; ++j) diag(j, j) = w[j] * mask[j];
  const Matrix ref = oracle::triple_loop(oracle::triple_loop(oracle::triple_loop(x, diag), ed.enc), ed.dec);
  EXPECT_LE((forward(x, w, ed, mask) - ref).cwiseAbs().maxCoeff(), 1e-12);
  // Full mask equals the unmasked path exactly.
  EXPECT_EQ(forward(x, w, ed, Vector::Ones(5)), forward(x, w, ed));
  EXPECT_EQ(forward(x, w, ed, mask_vector(topk_mask(w, 5), 5)), forward(x, w, ed));
}

TEST(Forward, RejectsShapeMismatch) {
  std::mt19937_64 gen(4);
  EXPECT_THROW(forward(Matrix::Zero(2, 3), Vector::Ones(4), random_ed(4, 2, gen)), ContractError);
}

TEST(FaeObjective, ZeroWeights) {
  std::mt19937_64 gen(5);
  const Matrix x = oracle::random_matrix(8, 6, gen);
  Hyperparams hp;
  hp.k = 3;
  const auto b = fae_objective(x, Vector::Zero(6), random_ed(6, 3, gen), hp);
  const double ms = x.squaredNorm() / 48.0;
  EXPECT_DOUBLE_EQ(b.full_recon, ms);
  EXPECT_DOUBLE_EQ(b.selected_recon, ms);
  EXPECT_EQ(b.l1, 0.0);
  EXPECT_NEAR(b.total, (1 + hp.lambda1) * ms, 1e-15);
}

TEST(FaeObjective, IdentityPipeline) {
  std::mt19937_64 gen(6);
  const Matrix x = oracle::random_matrix(8, 4, gen);
  Hyperparams hp;
  hp.k = 4;
  const EncoderDecoder ed{Matrix::Identity(4, 4), Matrix::Identity(4, 4)};
  const auto b = fae_objective(x, Vector::Ones(4), ed, hp);
  EXPECT_EQ(b.full_recon, 0.0);
  EXPECT_EQ(b.selected_recon, 0.0);
  EXPECT_DOUBLE_EQ(b.l1, 1.0);
  EXPECT_DOUBLE_EQ(b.total, hp.lambda2);
}

TEST(FaeObjective, MatchesCompositionOracle) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = oracle::random_matrix(9, 7, gen);
    const Vector w = oracle::random_vector(7, gen, 0.1, 1.5);
    const auto ed = random_ed(7, 3, gen);
    Hyperparams hp;
    hp.k = 3;
    hp.lambda1 = 1.7;
    hp.lambda2 = 0.3;
    hp.l1_mode = trial % 2 ? L1Mode::kSum : L1Mode::kMean;
    const Vector mask = oracle::sort_topk_mask(w, 3);
    const double full = oracle::naive_recon(x, w, Vector::Ones(7), ed.enc, ed.dec);
    const double sel = oracle::naive_recon(x, w, mask, ed.enc, ed.dec);
    const double l1 = w.cwiseAbs().sum() / (hp.l1_mode == L1Mode::kMean ? 7.0 : 1.0);
    const auto b = fae_objective(x, w, ed, hp);
    EXPECT_NEAR(b.full_recon, full, 1e-12);
    EXPECT_NEAR(b.selected_recon, sel, 1e-12);
    EXPECT_NEAR(b.l1, l1, 1e-12);
    EXPECT_NEAR(b.total, full + 1.7 * sel + 0.3 * l1, 1e-12);
    EXPECT_NEAR(b.total, b.full_recon + hp.lambda1 * b.selected_recon + hp.lambda2 * b.l1, 1e-12);
  }
}

TEST(FaeObjective, FrobeniusScaleDropsNormalization) {
  std::mt19937_64 gen(8);
  const Matrix x = oracle::random_matrix(5, 4, gen);
  const Vector w = oracle::random_vector(4, gen, 0.1, 1.0);
  const auto ed = random_ed(4, 2, gen);
  Hyperparams mean_hp, frob_hp;
  mean_hp.k = frob_hp.k = 2;
  frob_hp.loss_scale = LossScale::kFrobenius;
  EXPECT_NEAR(fae_objective(x, w, ed, frob_hp).full_recon, 20.0 * fae_objective(x, w, ed, mean_hp).full_recon,
              1e-12);
}

TEST(FaeObjective, InvariantUnderFeatureReordering) {
  std::mt19937_64 gen(9);
  const Index m = 8;
  const Matrix x = oracle::random_matrix(10, m, gen);
  const Vector w = oracle::random_vector(m, gen, 0.1, 1.0);
  const auto ed = random_ed(m, 3, gen);
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  Matrix xp(10, m), encp(m, 3), decp(3, m);
  Vector wp(m);
  for (Index j = 0; j < m; ++j) {
    const Index p = perm[static_cast<std::size_t>(j)];
    xp.col(p) = x.col(j);
    wp[p] = w[j];
    encp.row(p) = ed.enc.row(j);
    decp.col(p) = ed.dec.col(j);
  }
  Hyperparams hp;
  hp.k = 3;
  EXPECT_NEAR(fae_objective(xp, wp, {encp, decp}, hp).total, fae_objective(x, w, ed, hp).total, 1e-12);
}

TEST(IaeObjective, ZeroWeightsAndReductionToFae) {
  std::mt19937_64 gen(10);
  const Matrix x = oracle::random_matrix(7, 5, gen);
  const auto ed = random_ed(5, 2, gen);
  Hyperparams hp;
  hp.k = 2;
  hp.lambda1 = 0.4;
  EXPECT_DOUBLE_EQ(iae_objective(x, Vector::Zero(5), ed, hp).total, x.squaredNorm() / 35.0);

  const Vector w = oracle::random_vector(5, gen, 0.1, 1.0);
  Hyperparams as_fae = hp;
  as_fae.lambda1 = 0.0;
  as_fae.lambda2 = hp.lambda1;
  EXPECT_NEAR(iae_objective(x, w, ed, hp).total, fae_objective(x, w, ed, as_fae).total, 1e-14);

  const double oracle_total = oracle::naive_recon(x, w, Vector::Ones(5), ed.enc, ed.dec) + 0.4 * w.sum() / 5.0;
  EXPECT_NEAR(iae_objective(x, w, ed, hp).total, oracle_total, 1e-12);
}

// --- gradients ------------------------------------------------------------------

struct GradCase {
  Matrix x;
  Vector w;
  EncoderDecoder ed;
  Hyperparams hp;
};

GradCase random_case(std::mt19937_64& gen) {
  std::uniform_int_distribution<Index> dim(2, 10);
  GradCase c;
  const Index n = dim(gen), m = dim(gen);
  const Index d = std::uniform_int_distribution<Index>(1, 10)(gen);
  c.hp.k = std::uniform_int_distribution<Index>(1, m)(gen);
  c.hp.d = d;
  c.hp.lambda1 = std::uniform_real_distribution<double>(0.0, 3.0)(gen);
  c.hp.lambda2 = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  c.hp.l1_mode = gen() % 2 ? L1Mode::kMean : L1Mode::kSum;
  c.x = oracle::random_matrix(n, m, gen);
  c.w = oracle::random_vector(m, gen, 0.2, 1.5);
  c.ed = random_ed(m, d, gen);
  return c;
}

double check_against_fd(const GradCase& c, const oracle::NaiveObjective& obj, const Gradients& g) {
  const auto f = [&](const Vector& w, const Matrix& enc, const Matrix& dec) { return obj(c.x, w, enc, dec); };
  const auto fd = oracle::central_differences(f, c.w, c.ed.enc, c.ed.dec, 1e-5);
  return std::max({oracle::max_relative_error(g.w.data(), fd.w.data(), g.w.size()),
                   oracle::max_relative_error(g.enc.data(), fd.enc.data(), g.enc.size()),
                   oracle::max_relative_error(g.dec.data(), fd.dec.data(), g.dec.size())});
}

TEST(FaeGradients, MatchFiniteDifferences) {
  std::mt19937_64 gen(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const GradCase c = random_case(gen);
    oracle::NaiveObjective obj;
    obj.masks = {Vector::Ones(c.w.size()), oracle::sort_topk_mask(c.w, c.hp.k)};
    obj.weights = {1.0, c.hp.lambda1};
    obj.l1_weight = c.hp.lambda2;
    obj.l1_sum = c.hp.l1_mode == L1Mode::kSum;
    const Gradients g = fae_gradients(c.x, c.w, c.ed, c.hp);
    EXPECT_LE(check_against_fd(c, obj, g), 1e-5) << "trial " << trial;
  }
}

TEST(FaeGradients, ReduceToPlainAutoencoderGradients) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 5; ++trial) {
    GradCase c = random_case(gen);
    c.hp.lambda1 = 0.0;
    c.hp.lambda2 = 0.0;
    const Vector ones = Vector::Ones(c.w.size());
    const Gradients g = fae_gradients(c.x, ones, c.ed, c.hp);
    // Plain AE loss ||X - X W_E W_D||^2 / (nm), differentiated only in W_E, W_D.
    const auto ae = [&](const Vector&, const Matrix& enc, const Matrix& dec) {
      return oracle::naive_recon(c.x, ones, ones, enc, dec);
    };
    const auto fd = oracle::central_differences(ae, ones, c.ed.enc, c.ed.dec);
    EXPECT_LE(oracle::max_relative_error(g.enc.data(), fd.enc.data(), g.enc.size()), 1e-5);
    EXPECT_LE(oracle::max_relative_error(g.dec.data(), fd.dec.data(), g.dec.size()), 1e-5);
  }
}

TEST(FaeGradients, VanishAtIdentityMinimum) {
  std::mt19937_64 gen(12);
  const Matrix x = oracle::random_matrix(6, 4, gen);
  Hyperparams hp;
  hp.k = 4;
  hp.lambda2 = 0.0;
  const EncoderDecoder ed{Matrix::Identity(4, 4), Matrix::Identity(4, 4)};
  const Gradients g = fae_gradients(x, Vector::Ones(4), ed, hp);
  EXPECT_LE(g.w.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(g.enc.cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(g.dec.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FaeGradients, ZeroWeightGetsNoL1Subgradient) {
  std::mt19937_64 gen(13);
  const Matrix x = Matrix::Zero(3, 3);
  Hyperparams hp;
  hp.k = 1;
  Vector w = vec({0.0, 1.0, 2.0});
  const Gradients g = fae_gradients(x, w, random_ed(3, 2, gen), hp);
  EXPECT_EQ(g.w[0], 0.0);
  EXPECT_DOUBLE_EQ(g.w[1], hp.lambda2 / 3.0);
}

TEST(IaeGradients, MatchFiniteDifferences) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 10; ++trial) {
    const GradCase c = random_case(gen);
    oracle::NaiveObjective obj;
    obj.masks = {Vector::Ones(c.w.size())};
    obj.weights = {1.0};
    obj.l1_weight = c.hp.lambda1;
    obj.l1_sum = c.hp.l1_mode == L1Mode::kSum;
    EXPECT_LE(check_against_fd(c, obj, iae_gradients(c.x, c.w, c.ed, c.hp)), 1e-5);
  }
}

TEST(ProjectNonneg, ClipsNegatives) {
  EXPECT_EQ(project_nonneg(vec({-1, 0, 2})), vec({0, 0, 2}));
  EXPECT_EQ(project_nonneg(vec({0.5, 3})), vec({0.5, 3}));
}

TEST(ProjectNonneg, IdempotentAndNonExpanding) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector w = oracle::random_vector(20, gen, -2.0, 2.0);
    const Vector once = project_nonneg(w);
    EXPECT_EQ(project_nonneg(once), once);
    for (Index j = 0; j < w.size(); ++j) EXPECT_LE(std::abs(once[j]), std::abs(w[j]));
    EXPECT_GE(once.minCoeff(), 0.0);
  }
}

TEST(Modes, RoundTripNames) {
  EXPECT_EQ(parse_l1_mode(to_string(L1Mode::kSum)), L1Mode::kSum);
  EXPECT_EQ(parse_loss_scale(to_string(LossScale::kFrobenius)), LossScale::kFrobenius);
  EXPECT_THROW(parse_l1_mode("median"), ContractError);
}

}  // namespace
}  // namespace fae
