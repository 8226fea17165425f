#include "fae/hfae.hpp"

#include <sstream>

#include "fae/errors.hpp"

namespace fae {

void HierarchyParams::validate() const {
  if (h < 1) throw ContractError("hierarchy: h must be >= 1");
  if (k < 1) throw ContractError("hierarchy: k must be >= 1");
  if (static_cast<Index>(lambdas.size()) != h) {
    std::ostringstream msg;
    msg << "hierarchy: expected " << h << " group weights, got " << lambdas.size();
    throw ContractError(msg.str());
  }
  if (lambda0 < 0.0) throw ContractError("hierarchy: lambda0 must be >= 0");
  for (double l : lambdas) {
    if (l < 0.0) throw ContractError("hierarchy: group weights must be >= 0");
  }
}

std::vector<Index> HierarchicalSelection::all_indices() const {
  std::vector<Index> out;
  for (const auto& g : groups) out.insert(out.end(), g.indices.begin(), g.indices.end());
  return out;
}

HierarchicalSelection hierarchical_masks(const FeatureWeights& w, const HierarchyParams& hp) {
  if (hp.h < 1 || hp.k < 1 || hp.h * hp.k > w.size()) {
    std::ostringstream msg;
    msg << "hierarchical_masks: h*k = " << hp.h * hp.k << " exceeds m = " << w.size();
    throw ContractError(msg.str());
  }
  // One ranking serves all groups: group i is ranks (i-1)k .. ik-1, which is
  // what repeatedly zeroing earlier groups and re-taking the top k yields.
  const SelectionResult ranked = topk_mask(w, hp.h * hp.k);
  HierarchicalSelection out;
  out.groups.resize(static_cast<std::size_t>(hp.h));
  for (Index g = 0; g < hp.h; ++g) {
    auto& group = out.groups[static_cast<std::size_t>(g)];
    const auto first = static_cast<std::size_t>(g * hp.k);
    const auto last = first + static_cast<std::size_t>(hp.k);
    group.indices.assign(ranked.indices.begin() + first, ranked.indices.begin() + last);
    group.weights.assign(ranked.weights.begin() + first, ranked.weights.begin() + last);
  }
  return out;
}

CompositeObjective hfae_composite(const FeatureWeights& w, const HierarchyParams& hier,
                                  L1Mode l1_mode, LossScale loss_scale) {
  hier.validate();
  const HierarchicalSelection sel = hierarchical_masks(w, hier);
  CompositeObjective obj;
  obj.terms.push_back(full_term(1.0));
  for (std::size_t g = 0; g < sel.groups.size(); ++g) {
    obj.terms.push_back(masked_term(sel.groups[g], hier.lambdas[g]));
  }
  obj.l1_weight = hier.lambda0;
  obj.l1_mode = l1_mode;
  obj.loss_scale = loss_scale;
  return obj;
}

CompositeValue hfae_objective(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                              const HierarchyParams& hier, L1Mode l1_mode, LossScale loss_scale) {
  check_shapes(x, w, ed);
  return evaluate(hfae_composite(w, hier, l1_mode, loss_scale), x, w, ed);
}

Gradients hfae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                         const HierarchyParams& hier, L1Mode l1_mode, LossScale loss_scale) {
  check_shapes(x, w, ed);
  return gradients(hfae_composite(w, hier, l1_mode, loss_scale), x, w, ed);
}

HfaeResult train_hfae(const Matrix& train, const Matrix& val, const HierarchyParams& hier,
                      const Hyperparams& train_hp) {
  hier.validate();
  if (hier.h * hier.k > train.cols()) {
    throw ContractError("train_hfae: h*k exceeds the number of features");
  }
  Hyperparams hp = train_hp;
  hp.k = hier.k;
  hp.lambda1 = 0.0;
  hp.lambda2 = hier.lambda0;
  const auto objective = [&hier, &hp](const FeatureWeights& w) {
    return hfae_composite(w, hier, hp.l1_mode, hp.loss_scale);
  };
  TrainResult trained = train_composite(train, val, hp, objective, true, "hfae");
  HfaeResult out;
  out.selection = hierarchical_masks(trained.params.w, hier);
  out.params = std::move(trained.params);
  out.report = std::move(trained.report);
  return out;
}

}  // namespace fae
