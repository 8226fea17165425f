#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fae/checkpoint.hpp"
#include "fae/dataset.hpp"
#include "fae/extra_trees.hpp"

namespace fae {

struct TrainedModel {
  Checkpoint checkpoint;
  TrainReport report;
};

/// Dispatches to train_fae / train_iae / train_ae / train_hfae.
/// `hierarchy` is required for "hfae" and ignored otherwise.
TrainedModel train_method(const std::string& method, const Matrix& train, const Matrix& val,
                          const Hyperparams& hp,
                          const std::optional<HierarchyParams>& hierarchy = std::nullopt);

struct SelectionMetrics {
  double recon_mse = 0.0;
  /// NaN when either split has no labels.
  double accuracy = 0.0;
};

/// Linear decoder and extra-trees fitted on `train`, both scored on `test`.
SelectionMetrics evaluate_selection(const Dataset& train, const Dataset& test,
                                    const SelectionResult& sel, const ExtraTreesParams& forest = {});

/// Concatenation of the groups, in order.
SelectionResult union_selection(const std::vector<SelectionResult>& groups);

}  // namespace fae
