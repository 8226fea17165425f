#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fae/linalg.hpp"

namespace fae {

/// Non-negative importance score per input feature; the diagonal of the
/// one-to-one layer.
using FeatureWeights = Vector;

/// Bias-free linear encoder (m x d) and decoder (d x m).
struct EncoderDecoder {
  Matrix enc;
  Matrix dec;

  Index input_dim() const { return enc.rows(); }
  Index latent_dim() const { return enc.cols(); }
};

enum class L1Mode { kMean, kSum };
/// kMean divides reconstruction terms by n*m; kFrobenius keeps the raw squared norm.
enum class LossScale { kMean, kFrobenius };

std::string_view to_string(L1Mode mode);
std::string_view to_string(LossScale scale);
L1Mode parse_l1_mode(std::string_view text);
LossScale parse_loss_scale(std::string_view text);

inline constexpr double kInitLow = 0.999999;
inline constexpr double kInitHigh = 0.9999999;

struct Hyperparams {
  Index k = 50;
  /// Latent dimension; 0 means "same as k".
  Index d = 0;
  double lambda1 = 2.0;
  double lambda2 = 0.1;
  double lr = 1e-3;
  int epochs = 1000;
  /// Mini-batch size; 0 means full batch.
  Index batch = 0;
  std::uint64_t seed = 0;
  L1Mode l1_mode = L1Mode::kMean;
  LossScale loss_scale = LossScale::kMean;
  /// Return the best-validation epoch's parameters rather than the last ones.
  bool restore_best = true;

  Index latent_dim() const { return d > 0 ? d : k; }
};

/// Selected features ordered by descending weight (ties: lower index first).
struct SelectionResult {
  std::vector<Index> indices;
  std::vector<double> weights;

  Index size() const { return static_cast<Index>(indices.size()); }
};

struct ObjectiveBreakdown {
  double full_recon = 0.0;
  double selected_recon = 0.0;
  double l1 = 0.0;
  double total = 0.0;
};

struct Gradients {
  Vector w;
  Matrix enc;
  Matrix dec;
};

/// The k largest entries of w. Throws ContractError unless 1 <= k <= m.
SelectionResult topk_mask(const FeatureWeights& w, Index k);

/// 0/1 indicator of `sel` over m features.
Vector mask_vector(const SelectionResult& sel, Index m);

/// X * Diag(w) * W_E * W_D.
Matrix forward(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed);
/// X * Diag(w .* mask) * W_E * W_D.
Matrix forward(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
               const Vector& mask);

/// Full-path reconstruction + lambda1 * top-k reconstruction + lambda2 * l1(w).
ObjectiveBreakdown fae_objective(const Matrix& x, const FeatureWeights& w,
                                 const EncoderDecoder& ed, const Hyperparams& hp);
/// Full-path reconstruction + lambda1 * l1(w). selected_recon is left at 0.
ObjectiveBreakdown iae_objective(const Matrix& x, const FeatureWeights& w,
                                 const EncoderDecoder& ed, const Hyperparams& hp);

/// Exact gradients of fae_objective's total; the top-k mask is taken from
/// the current w. If `value` is non-null it receives the objective.
Gradients fae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                        const Hyperparams& hp, ObjectiveBreakdown* value = nullptr);
Gradients iae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                        const Hyperparams& hp, ObjectiveBreakdown* value = nullptr);

/// max(w, 0) entrywise.
FeatureWeights project_nonneg(FeatureWeights w);

// ---------------------------------------------------------------------------
// Masked reconstruction objectives.
//
// FAE, IAE, the plain AE and h-HFAE are all a weighted sum of reconstruction
// terms X - X Diag(w .* mask_t) W_E W_D, one per mask, plus an L1 penalty on
// w. The routines below evaluate and differentiate that sum once; the named
// objectives above are thin wrappers.
// ---------------------------------------------------------------------------

struct ReconTerm {
  /// Feature indices with mask value 1, ascending. Empty together with
  /// `all_features` = true means the unmasked path.
  std::vector<Index> support;
  bool all_features = false;
  double weight = 1.0;
};

struct CompositeObjective {
  std::vector<ReconTerm> terms;
  double l1_weight = 0.0;
  L1Mode l1_mode = L1Mode::kMean;
  LossScale loss_scale = LossScale::kMean;
};

struct CompositeValue {
  /// Unweighted reconstruction error of each term.
  std::vector<double> recon;
  /// Unweighted penalty, l1(w).
  double l1 = 0.0;
  double total = 0.0;
};

ReconTerm full_term(double weight);
ReconTerm masked_term(const SelectionResult& sel, double weight);

/// l1(w) under the given mode: sum |w_j|, or that sum divided by m.
double l1_penalty(const FeatureWeights& w, L1Mode mode);

CompositeValue evaluate(const CompositeObjective& obj, const Matrix& x, const FeatureWeights& w,
                        const EncoderDecoder& ed);

/// Gradients of evaluate(...).total. `train_w` = false skips the weight
/// gradient (left zero), as in the plain autoencoder.
Gradients gradients(const CompositeObjective& obj, const Matrix& x, const FeatureWeights& w,
                    const EncoderDecoder& ed, CompositeValue* value = nullptr,
                    bool train_w = true);

/// Objective builders shared by the evaluators and the trainer.
CompositeObjective fae_composite(const FeatureWeights& w, const Hyperparams& hp);
CompositeObjective iae_composite(const Hyperparams& hp);
CompositeObjective ae_composite(const Hyperparams& hp);

/// Checks x.cols() == w.size() == ed.input_dim() and ed's inner shapes.
void check_shapes(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed);

}  // namespace fae
