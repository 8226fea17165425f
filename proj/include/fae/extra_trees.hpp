#pragma once

#include <cstdint>
#include <vector>

#include "fae/linalg.hpp"

namespace fae {

struct ExtraTreesParams {
  int n_trees = 100;
  /// Candidate features per split; 0 means max(1, floor(sqrt(m))).
  int max_features = 0;
  int min_samples_split = 2;
  std::uint64_t seed = 0;
};

/// Extremely randomized trees: at each node, draw `max_features` non-constant
/// features, one uniform threshold per feature inside the node's range, and
/// keep the candidate with the lowest weighted Gini impurity. Trees grow
/// until nodes are pure, too small to split, or constant.
struct ExtraTreesModel {
  struct Node {
    /// -1 marks a leaf.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Leaf number (row of `histograms`), -1 for internal nodes.
    int leaf = -1;
  };

  struct Tree {
    std::vector<Node> nodes;
    /// leaf-major class counts, leaves * n_classes entries.
    std::vector<std::uint32_t> histograms;

    /// Node index of the leaf that `row` falls into.
    int leaf_of(const double* row) const;
  };

  std::vector<Tree> trees;
  int n_classes = 0;
  Index n_features = 0;
  ExtraTreesParams params;
};

/// Per-tree seeds are derive_seed(params.seed, tree index). Throws
/// ContractError for fewer than two samples, a label/row mismatch or a
/// negative label.
ExtraTreesModel fit_extra_trees(const Matrix& train, const std::vector<int>& labels,
                                const ExtraTreesParams& params = {});

/// Argmax of the summed leaf class counts; ties go to the lower class id.
std::vector<int> predict(const ExtraTreesModel& model, const Matrix& x);

}  // namespace fae
