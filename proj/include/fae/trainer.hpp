#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fae/errors.hpp"
#include "fae/model.hpp"

namespace fae {

struct ModelParams {
  FeatureWeights w;
  EncoderDecoder ed;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// First and second moments for every parameter tensor of a ModelParams.
struct AdamState {
  AdamConfig config;
  Vector m_w, v_w;
  Matrix m_enc, v_enc;
  Matrix m_dec, v_dec;
  std::int64_t t = 0;

  static AdamState zeros_like(const ModelParams& params, AdamConfig config = {});
};

/// One bias-corrected Adam update of a flat parameter block at step t (t >= 1).
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::int64_t t, const AdamConfig& config, double lr);

/// Increments state.t, updates every tensor, then projects w onto w >= 0.
/// With update_w = false the weights are left untouched.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               bool update_w = true);

struct EpochRecord {
  int epoch = 0;
  /// Unweighted reconstruction term of each objective term; [0] is the full path.
  std::vector<double> terms;
  double l1 = 0.0;
  double total = 0.0;
  double val_total = 0.0;
};

struct TrainReport {
  std::string method;
  std::vector<EpochRecord> epochs;
  /// Index into `epochs` of the minimal validation total; -1 when no epoch ran.
  int best_epoch = -1;
  double initial_train_total = 0.0;
  double initial_val_total = 0.0;
  double wall_seconds = 0.0;
  Hyperparams hp;
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  int threads = 1;
};

/// Thrown when training diverges or meets a non-finite value; carries the
/// epochs logged so far.
class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, TrainReport report)
      : NumericalError(what), report_(std::move(report)) {}
  const TrainReport& report() const noexcept { return report_; }

 private:
  TrainReport report_;
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

/// Builds the objective for the current weights; masks are recomputed from w
/// on every call.
using ObjectiveFactory = std::function<CompositeObjective(const FeatureWeights&)>;

/// Shared Adam loop. Initializes w on [kInitLow, kInitHigh) (or to ones when
/// `train_w` is false) and W_E, W_D with Xavier normal, all from hp.seed.
/// Returns the best-validation parameters unless hp.restore_best is false.
TrainResult train_composite(const Matrix& train, const Matrix& val, const Hyperparams& hp,
                            const ObjectiveFactory& objective, bool train_w,
                            const std::string& method);

TrainResult train_fae(const Matrix& train, const Matrix& val, const Hyperparams& hp);
TrainResult train_iae(const Matrix& train, const Matrix& val, const Hyperparams& hp);
/// Plain linear autoencoder: w fixed to ones, no penalty.
TrainResult train_ae(const Matrix& train, const Matrix& val, const Hyperparams& hp);

/// Plain-AE ranking: the k encoder rows of largest L2 norm.
SelectionResult encoder_norm_ranking(const EncoderDecoder& ed, Index k);

}  // namespace fae
