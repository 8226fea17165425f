#include "fae/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "fae/rng.hpp"

namespace fae {
namespace {

template <typename Derived>
std::span<double> flat(Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename Derived>
std::span<const double> flat(const Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

constexpr double kDivergenceFactor = 1e6;

Matrix gather_rows(const Matrix& x, const std::vector<Index>& rows, std::size_t begin,
                   std::size_t end) {
  Matrix out(static_cast<Index>(end - begin), x.cols());
  for (std::size_t r = begin; r < end; ++r) out.row(static_cast<Index>(r - begin)) = x.row(rows[r]);
  return out;
}

}  // namespace

AdamState AdamState::zeros_like(const ModelParams& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.m_w = s.v_w = Vector::Zero(params.w.size());
  s.m_enc = s.v_enc = Matrix::Zero(params.ed.enc.rows(), params.ed.enc.cols());
  s.m_dec = s.v_dec = Matrix::Zero(params.ed.dec.rows(), params.ed.dec.cols());
  return s;
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t t, const AdamConfig& config, double lr) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ContractError("adam_update: parameter, gradient and moment sizes differ");
  }
  if (t < 1) throw ContractError("adam_update: step counter must be >= 1");
  const double td = static_cast<double>(t);
  const double correct1 = 1.0 - std::pow(config.beta1, td);
  const double correct2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correct1;
    const double v_hat = v[i] / correct2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               bool update_w) {
  if (grads.w.size() != params.w.size() || grads.enc.rows() != params.ed.enc.rows() ||
      grads.enc.cols() != params.ed.enc.cols() || grads.dec.rows() != params.ed.dec.rows() ||
      grads.dec.cols() != params.ed.dec.cols() || state.m_w.size() != params.w.size() ||
      state.m_enc.size() != params.ed.enc.size() || state.m_dec.size() != params.ed.dec.size()) {
    throw ContractError("adam_step: gradient or state shape does not match parameters");
  }
  ++state.t;
  if (update_w) {
    adam_update(flat(params.w), flat(grads.w), flat(state.m_w), flat(state.v_w), state.t,
                state.config, lr);
    params.w = project_nonneg(std::move(params.w));
  }
  adam_update(flat(params.ed.enc), flat(grads.enc), flat(state.m_enc), flat(state.v_enc), state.t,
              state.config, lr);
  adam_update(flat(params.ed.dec), flat(grads.dec), flat(state.m_dec), flat(state.v_dec), state.t,
              state.config, lr);
  if (!params.w.allFinite() || !params.ed.enc.allFinite() || !params.ed.dec.allFinite()) {
    throw NumericalError("adam_step: non-finite parameter after update");
  }
}

TrainResult train_composite(const Matrix& train, const Matrix& val, const Hyperparams& hp,
                            const ObjectiveFactory& objective, bool train_w,
                            const std::string& method) {
  const Index m = train.cols();
  if (val.cols() != m) throw ContractError("train: train and validation feature counts differ");
  if (train.rows() < 1 || val.rows() < 1) throw ContractError("train: empty train or validation set");
  if (hp.k < 1 || hp.k > m) throw ContractError("train: k must lie in [1, m]");
  if (!(hp.lr > 0.0)) throw ContractError("train: learning rate must be positive");
  if (hp.epochs < 0 || hp.batch < 0) throw ContractError("train: negative epochs or batch size");
  require_finite(train, "train data");
  require_finite(val, "validation data");

  const auto started = std::chrono::steady_clock::now();
  SeededRng rng(hp.seed);
  TrainResult result;
  ModelParams& params = result.params;
  params.w = train_w ? uniform_init(m, kInitLow, kInitHigh, rng) : Vector::Ones(m);
  params.ed.enc = xavier_normal(m, hp.latent_dim(), rng);
  params.ed.dec = xavier_normal(hp.latent_dim(), m, rng);

  TrainReport& report = result.report;
  report.method = method;
  report.hp = hp;
  report.seed = hp.seed;
  report.rng_algorithm = std::string(SeededRng::kAlgorithm);
  report.threads = 1;
  report.initial_train_total = evaluate(objective(params.w), train, params.w, params.ed).total;
  report.initial_val_total = evaluate(objective(params.w), val, params.w, params.ed).total;

  const auto finish = [&] {
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  if (hp.epochs == 0) {
    finish();
    return result;
  }

  AdamState adam = AdamState::zeros_like(params);
  const Index n = train.rows();
  const bool full_batch = hp.batch == 0 || hp.batch >= n;
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  ModelParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  const double limit = kDivergenceFactor * std::max(report.initial_train_total, 1e-300);

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      if (full_batch) {
        CompositeValue value;
        const Gradients g = gradients(objective(params.w), train, params.w, params.ed, &value, train_w);
        adam_step(params, g, adam, hp.lr, train_w);
        rec.terms = value.recon;
        rec.l1 = value.l1;
        rec.total = value.total;
      } else {
        rng.shuffle(order);
        const std::size_t bsize = static_cast<std::size_t>(hp.batch);
        for (std::size_t begin = 0; begin < order.size(); begin += bsize) {
          const std::size_t end = std::min(order.size(), begin + bsize);
          const Matrix xb = gather_rows(train, order, begin, end);
          CompositeValue value;
          const Gradients g = gradients(objective(params.w), xb, params.w, params.ed, &value, train_w);
          adam_step(params, g, adam, hp.lr, train_w);
          const double share = static_cast<double>(end - begin) / static_cast<double>(n);
          if (rec.terms.empty()) rec.terms.assign(value.recon.size(), 0.0);
          for (std::size_t t = 0; t < value.recon.size(); ++t) rec.terms[t] += share * value.recon[t];
          rec.l1 += share * value.l1;
          rec.total += share * value.total;
        }
      }
      rec.val_total = evaluate(objective(params.w), val, params.w, params.ed).total;
    } catch (const NumericalError& e) {
      finish();
      throw TrainingError(std::string("training aborted at epoch ") + std::to_string(epoch) + ": " +
                              e.what(),
                          report);
    }
    report.epochs.push_back(rec);
    if (!(rec.total <= limit)) {
      finish();
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << ": total " << rec.total
          << " exceeds 1e6 x initial " << report.initial_train_total;
      throw TrainingError(msg.str(), report);
    }
    if (rec.val_total < best_val) {
      best_val = rec.val_total;
      report.best_epoch = static_cast<int>(report.epochs.size()) - 1;
      if (hp.restore_best) best = params;
    }
  }
  if (hp.restore_best) params = std::move(best);
  finish();
  return result;
}

TrainResult train_fae(const Matrix& train, const Matrix& val, const Hyperparams& hp) {
  return train_composite(
      train, val, hp, [&hp](const FeatureWeights& w) { return fae_composite(w, hp); }, true, "fae");
}

TrainResult train_iae(const Matrix& train, const Matrix& val, const Hyperparams& hp) {
  return train_composite(
      train, val, hp, [&hp](const FeatureWeights&) { return iae_composite(hp); }, true, "iae");
}

TrainResult train_ae(const Matrix& train, const Matrix& val, const Hyperparams& hp) {
  return train_composite(
      train, val, hp, [&hp](const FeatureWeights&) { return ae_composite(hp); }, false, "ae");
}

SelectionResult encoder_norm_ranking(const EncoderDecoder& ed, Index k) {
  const Vector norms = ed.enc.rowwise().norm();
  return topk_mask(norms, k);
}

}  // namespace fae
