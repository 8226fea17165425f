#pragma once

#include <vector>

#include "fae/model.hpp"
#include "fae/trainer.hpp"

namespace fae {

/// h disjoint groups of k features. lambda0 weighs the L1 penalty,
/// lambdas[i] the reconstruction through group i + 1.
struct HierarchyParams {
  Index h = 3;
  Index k = 50;
  double lambda0 = 0.05;
  std::vector<double> lambdas = {1.5, 2.0, 3.0};

  /// Throws ContractError on h < 1, lambdas.size() != h or a negative lambda.
  void validate() const;
};

struct HierarchicalSelection {
  std::vector<SelectionResult> groups;

  /// All selected indices, group by group.
  std::vector<Index> all_indices() const;
};

/// Group 1 is the top-k of w; group i is the top-k of w once groups 1..i-1
/// are removed. Throws ContractError when h * k > m.
HierarchicalSelection hierarchical_masks(const FeatureWeights& w, const HierarchyParams& hp);

/// Full-path term, one masked term per group, and lambda0 * l1(w).
CompositeObjective hfae_composite(const FeatureWeights& w, const HierarchyParams& hier,
                                  L1Mode l1_mode = L1Mode::kMean,
                                  LossScale loss_scale = LossScale::kMean);

/// recon[0] is the full path, recon[i] group i; `total` includes every weight.
CompositeValue hfae_objective(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                              const HierarchyParams& hier, L1Mode l1_mode = L1Mode::kMean,
                              LossScale loss_scale = LossScale::kMean);

Gradients hfae_gradients(const Matrix& x, const FeatureWeights& w, const EncoderDecoder& ed,
                         const HierarchyParams& hier, L1Mode l1_mode = L1Mode::kMean,
                         LossScale loss_scale = LossScale::kMean);

struct HfaeResult {
  ModelParams params;
  HierarchicalSelection selection;
  TrainReport report;
};

/// Trains h-HFAE. Optimizer settings (lr, epochs, batch, seed, d, l1 mode,
/// loss scale) come from `train_hp`; its k and lambdas are ignored.
HfaeResult train_hfae(const Matrix& train, const Matrix& val, const HierarchyParams& hier,
                      const Hyperparams& train_hp);

}  // namespace fae
