#include "fae/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fae/errors.hpp"

namespace fae {

std::string_view to_string(L1Mode mode) { return mode == L1Mode::kMean ? "mean" : "sum"; }

std::string_view to_string(LossScale scale) {
  return scale == LossScale::kMean ? "mean" : "frobenius";
}

L1Mode parse_l1_mode(std::string_view text) {
  if (text == "mean") return L1Mode::kMean;
  if (text == "sum") return L1Mode::kSum;
  throw ContractError("unknown l1 mode '" + std::string(text) + "' (expected mean|sum)");
}

LossScale parse_loss_scale(std::string_view text) {
  if (text == "mean") return LossScale::kMean;
  if (text == "frobenius") return LossScale::kFrobenius;
  throw ContractError("unknown loss scale '" + std::string(text) + "' (expected mean|frobenius)");
}

SelectionResult topk_mask(const FeatureWeights& w, Index k) {
  const Index m = w.size();
  if (k < 1 || k > m) {
    std::ostringstream msg;
    msg << "topk_mask: k=" << k << " outside [1, " << m << "]";
    throw ContractError(msg.str());
  }
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  const auto before = [&w](Index a, Index b) { return w[a] > w[b] || (w[a] == w[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), before);
  order.resize(static_cast<std::size_t>(k));

  SelectionResult sel;
  sel.indices = std::move(order);
  sel.weights.reserve(sel.indices.size());
  for (Index j : sel.indices) sel.weights.push_back(w[j]);
  return sel;
}

Vector mask_vector(const SelectionResult& sel, Index m) {
  Vector mask = Vector::Zero(m);
  for (Index j : sel.indices) {
    if (j < 0 || j >= m) throw ContractError("mask_vector: index out of range");
    mask[j] = 1.0;
  }
  return mask;
}

void check_shapes(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed) {
  const bool ok = x.cols() == w.size() && ed.enc.rows() == w.size() &&
                  ed.dec.rows() == ed.enc.cols() && ed.dec.cols() == w.size() &&
                  ed.enc.cols() >= 1;
  if (!ok) {
    std::ostringstream msg;
    msg << "shape mismatch: x " << x.rows() << "x" << x.cols() << ", w " << w.size() << ", enc "
        << ed.enc.rows() << "x" << ed.enc.cols() << ", dec " << ed.dec.rows() << "x"
        << ed.dec.cols();
    throw ContractError(msg.str());
  }
}

Matrix forward(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed) {
  check_shapes(x, w, ed);
  const Matrix scaled_enc = w.asDiagonal() * ed.enc;
  const Matrix latent = x * scaled_enc;
  return latent * ed.dec;
}

Matrix forward(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
               const Vector& mask) {
  if (mask.size() != w.size()) throw ContractError("forward: mask length differs from w");
  return forward(x, FeatureWeights(w.cwiseProduct(mask)), ed);
}

FeatureWeights project_nonneg(FeatureWeights w) {
  w = w.cwiseMax(0.0);
  return w;
}

// --- composite objective -----------------------------------------------------

ReconTerm full_term(double weight) {
  ReconTerm t;
  t.all_features = true;
  t.weight = weight;
  return t;
}

ReconTerm masked_term(const SelectionResult& sel, double weight) {
  ReconTerm t;
  t.support = sel.indices;
  std::sort(t.support.begin(), t.support.end());
  t.weight = weight;
  return t;
}

double l1_penalty(const FeatureWeights& w, L1Mode mode) {
  const double sum = w.cwiseAbs().sum();
  return mode == L1Mode::kMean ? sum / static_cast<double>(w.size()) : sum;
}

namespace {

struct TermPass {
  Matrix latent;    // n x d
  Matrix residual;  // n x m, reconstruction - x
  double recon = 0.0;
};

// Runs one reconstruction path. `xs` is x restricted to the term's support
// (unused for the full path).
TermPass run_term(const ReconTerm& term, const Matrix& x, const Matrix& xs,
                  const FeatureWeights& w, const EncoderDecoder& ed, LossScale scale) {
  TermPass pass;
  if (term.all_features) {
    const Matrix scaled_enc = w.asDiagonal() * ed.enc;
    pass.latent.noalias() = x * scaled_enc;
  } else {
    Matrix scaled_enc(static_cast<Index>(term.support.size()), ed.enc.cols());
    for (std::size_t s = 0; s < term.support.size(); ++s) {
      const Index j = term.support[s];
      scaled_enc.row(static_cast<Index>(s)) = w[j] * ed.enc.row(j);
    }
    pass.latent.noalias() = xs * scaled_enc;
  }
  pass.residual.noalias() = pass.latent * ed.dec;
  pass.residual -= x;
  const double sq = pass.residual.squaredNorm();
  pass.recon = scale == LossScale::kMean ? sq / static_cast<double>(x.size()) : sq;
  return pass;
}

double scale_factor(LossScale scale, const Matrix& x) {
  return scale == LossScale::kMean ? 2.0 / static_cast<double>(x.size()) : 2.0;
}

void check_term(const ReconTerm& term, Index m) {
  if (term.all_features) return;
  for (Index j : term.support) {
    if (j < 0 || j >= m) throw ContractError("objective: mask index out of range");
  }
}

}  // namespace

CompositeValue evaluate(const CompositeObjective& obj, const Matrix& x, const FeatureWeights& w,
                        const EncoderDecoder& ed) {
  check_shapes(x, w, ed);
  CompositeValue value;
  value.recon.reserve(obj.terms.size());
  for (const ReconTerm& term : obj.terms) {
    check_term(term, w.size());
    const Matrix xs = term.all_features ? Matrix() : gather_columns(x, term.support);
    const TermPass pass = run_term(term, x, xs, w, ed, obj.loss_scale);
    value.recon.push_back(pass.recon);
    value.total += term.weight * pass.recon;
  }
  value.l1 = l1_penalty(w, obj.l1_mode);
  value.total += obj.l1_weight * value.l1;
  if (!std::isfinite(value.total)) throw NumericalError("objective: non-finite value");
  return value;
}

Gradients gradients(const CompositeObjective& obj, const Matrix& x, const FeatureWeights& w,
                    const EncoderDecoder& ed, CompositeValue* value, bool train_w) {
  check_shapes(x, w, ed);
  const Index m = w.size();
  Gradients g{Vector::Zero(m), Matrix::Zero(ed.enc.rows(), ed.enc.cols()),
              Matrix::Zero(ed.dec.rows(), ed.dec.cols())};
  CompositeValue local;
  local.recon.reserve(obj.terms.size());

  for (const ReconTerm& term : obj.terms) {
    check_term(term, m);
    const Matrix xs = term.all_features ? Matrix() : gather_columns(x, term.support);
    const TermPass pass = run_term(term, x, xs, w, ed, obj.loss_scale);
    local.recon.push_back(pass.recon);
    local.total += term.weight * pass.recon;
    if (term.weight == 0.0) continue;

    const double c = term.weight * scale_factor(obj.loss_scale, x);
    g.dec.noalias() += c * (pass.latent.transpose() * pass.residual);
    Matrix back(x.rows(), ed.dec.rows());
    back.noalias() = pass.residual * ed.dec.transpose();
    if (term.all_features) {
      Matrix proj(m, back.cols());
      proj.noalias() = x.transpose() * back;
      g.enc.noalias() += c * (w.asDiagonal() * proj);
      if (train_w) g.w += c * proj.cwiseProduct(ed.enc).rowwise().sum();
    } else {
      Matrix proj(xs.cols(), back.cols());
      proj.noalias() = xs.transpose() * back;
      for (std::size_t s = 0; s < term.support.size(); ++s) {
        const Index j = term.support[s];
        const auto row = proj.row(static_cast<Index>(s));
        g.enc.row(j) += (c * w[j]) * row;
        if (train_w) g.w[j] += c * row.dot(ed.enc.row(j));
      }
    }
  }

  local.l1 = l1_penalty(w, obj.l1_mode);
  local.total += obj.l1_weight * local.l1;
  if (train_w && obj.l1_weight != 0.0) {
    const double per = obj.l1_weight * (obj.l1_mode == L1Mode::kMean ? 1.0 / static_cast<double>(m) : 1.0);
    for (Index j = 0; j < m; ++j) {
      if (w[j] > 0.0) g.w[j] += per;
      else if (w[j] < 0.0) g.w[j] -= per;
    }
  }

  if (!std::isfinite(local.total) || !g.w.allFinite() || !g.enc.allFinite() ||
      !g.dec.allFinite()) {
    throw NumericalError("gradients: non-finite value");
  }
  if (value) *value = std::move(local);
  return g;
}

CompositeObjective fae_composite(const FeatureWeights& w, const Hyperparams& hp) {
  CompositeObjective obj;
  obj.terms.push_back(full_term(1.0));
  obj.terms.push_back(masked_term(topk_mask(w, hp.k), hp.lambda1));
  obj.l1_weight = hp.lambda2;
  obj.l1_mode = hp.l1_mode;
  obj.loss_scale = hp.loss_scale;
  return obj;
}

CompositeObjective iae_composite(const Hyperparams& hp) {
  CompositeObjective obj;
  obj.terms.push_back(full_term(1.0));
  obj.l1_weight = hp.lambda1;
  obj.l1_mode = hp.l1_mode;
  obj.loss_scale = hp.loss_scale;
  return obj;
}

CompositeObjective ae_composite(const Hyperparams& hp) {
  CompositeObjective obj;
  obj.terms.push_back(full_term(1.0));
  obj.l1_mode = hp.l1_mode;
  obj.loss_scale = hp.loss_scale;
  return obj;
}

namespace {

ObjectiveBreakdown to_breakdown(const CompositeValue& v) {
  ObjectiveBreakdown b;
  b.full_recon = v.recon.at(0);
  b.selected_recon = v.recon.size() > 1 ? v.recon[1] : 0.0;
  b.l1 = v.l1;
  b.total = v.total;
  return b;
}

}  // namespace

ObjectiveBreakdown fae_objective(const Matrix& x, const FeatureWeights& w,
                                 const EncoderDecoder& ed, const Hyperparams& hp) {
  check_shapes(x, w, ed);
  return to_breakdown(evaluate(fae_composite(w, hp), x, w, ed));
}

ObjectiveBreakdown iae_objective(const Matrix& x, const FeatureWeights& w,
                                 const EncoderDecoder& ed, const Hyperparams& hp) {
  return to_breakdown(evaluate(iae_composite(hp), x, w, ed));
}

Gradients fae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                        const Hyperparams& hp, ObjectiveBreakdown* value) {
  check_shapes(x, w, ed);
  CompositeValue v;
  Gradients g = gradients(fae_composite(w, hp), x, w, ed, &v);
  if (value) *value = to_breakdown(v);
  return g;
}

Gradients iae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                        const Hyperparams& hp, ObjectiveBreakdown* value) {
  CompositeValue v;
  Gradients g = gradients(iae_composite(hp), x, w, ed, &v);
  if (value) *value = to_breakdown(v);
  return g;
}

}  // namespace fae
