#include "fae/extra_trees.hpp"

#include <algorithm>
#include <cmath>

#include "fae/errors.hpp"
#include "fae/rng.hpp"

namespace fae {
namespace {

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<int>& y, int n_classes, int max_features,
              int min_split, std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), max_features_(max_features), min_split_(min_split),
        rng_(seed), features_(static_cast<std::size_t>(x.cols())) {
    for (std::size_t f = 0; f < features_.size(); ++f) features_[f] = static_cast<int>(f);
  }

  ExtraTreesModel::Tree build() {
    std::vector<int> samples(static_cast<std::size_t>(x_.rows()));
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = static_cast<int>(i);

    struct Pending {
      int node;
      std::size_t begin, end;
    };
    ExtraTreesModel::Tree tree;
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, samples.size()}};
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(n_classes_));
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::fill(counts.begin(), counts.end(), 0u);
      for (std::size_t i = p.begin; i < p.end; ++i) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(samples[i])])];
      const auto nonzero = std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; });
      const auto size = static_cast<int>(p.end - p.begin);

      Candidate best;
      if (nonzero > 1 && size >= min_split_) best = choose_split(samples, p.begin, p.end);
      if (best.feature < 0) {
        auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
        node.leaf = static_cast<int>(tree.histograms.size() / counts.size());
        tree.histograms.insert(tree.histograms.end(), counts.begin(), counts.end());
        continue;
      }
      const auto mid = std::partition(samples.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                      samples.begin() + static_cast<std::ptrdiff_t>(p.end),
                                      [&](int s) { return x_(s, best.feature) <= best.threshold; });
      const auto split_at = static_cast<std::size_t>(mid - samples.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left;
      node.right = left + 1;
      // Right pushed first so the left subtree is expanded first.
      stack.push_back({left + 1, split_at, p.end});
      stack.push_back({left, p.begin, split_at});
    }
    return tree;
  }

 private:
  Candidate choose_split(const std::vector<int>& samples, std::size_t begin, std::size_t end) {
    Candidate best;
    int drawn = 0;
    std::vector<std::uint32_t> left(static_cast<std::size_t>(n_classes_));
    std::vector<std::uint32_t> right(static_cast<std::size_t>(n_classes_));
    // Partial Fisher-Yates over the feature list: visit features in random
    // order until max_features non-constant ones have been scored.
    for (std::size_t i = 0; i < features_.size() && drawn < max_features_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(features_.size() - i));
      std::swap(features_[i], features_[j]);
      const int f = features_[i];
      double lo = x_(samples[begin], f), hi = lo;
      for (std::size_t s = begin + 1; s < end; ++s) {
        const double v = x_(samples[s], f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      ++drawn;
      double t = lo + (hi - lo) * rng_.uniform();
      if (!(t > lo && t < hi)) t = lo + 0.5 * (hi - lo);

      std::fill(left.begin(), left.end(), 0u);
      std::fill(right.begin(), right.end(), 0u);
      for (std::size_t s = begin; s < end; ++s) {
        const auto cls = static_cast<std::size_t>(y_[static_cast<std::size_t>(samples[s])]);
        ++(x_(samples[s], f) <= t ? left : right)[cls];
      }
      const double score = weighted_gini(left) + weighted_gini(right);
      if (best.feature < 0 || score < best.score) best = {f, t, score};
    }
    return best;
  }

  // n * gini = n - sum(c^2) / n.
  static double weighted_gini(const std::vector<std::uint32_t>& counts) {
    double n = 0.0, sq = 0.0;
    for (std::uint32_t c : counts) {
      n += c;
      sq += static_cast<double>(c) * c;
    }
    return n > 0.0 ? n - sq / n : 0.0;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  int n_classes_;
  int max_features_;
  int min_split_;
  SeededRng rng_;
  std::vector<int> features_;
};

}  // namespace

int ExtraTreesModel::Tree::leaf_of(const double* row) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    node = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return node;
}

ExtraTreesModel fit_extra_trees(const Matrix& train, const std::vector<int>& labels,
                                const ExtraTreesParams& params) {
  if (static_cast<Index>(labels.size()) != train.rows()) {
    throw ContractError("fit_extra_trees: label count differs from row count");
  }
  if (train.rows() < 2) throw ContractError("fit_extra_trees: need at least two samples");
  if (train.cols() < 1) throw ContractError("fit_extra_trees: no features");
  if (params.n_trees < 1) throw ContractError("fit_extra_trees: n_trees must be >= 1");
  if (params.min_samples_split < 2) throw ContractError("fit_extra_trees: min_samples_split must be >= 2");
  require_finite(train, "fit_extra_trees input");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 0) {
    throw ContractError("fit_extra_trees: labels must be non-negative");
  }

  ExtraTreesModel model;
  model.params = params;
  model.n_classes = max_label + 1;
  model.n_features = train.cols();
  const int max_features = params.max_features > 0
                               ? std::min<int>(params.max_features, static_cast<int>(train.cols()))
                               : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(train.cols()))));
  model.params.max_features = max_features;
  model.trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    TreeBuilder builder(train, labels, model.n_classes, max_features, params.min_samples_split,
                        derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    model.trees.push_back(builder.build());
  }
  return model;
}

std::vector<int> predict(const ExtraTreesModel& model, const Matrix& x) {
  if (model.trees.empty()) throw ContractError("predict: empty forest");
  if (x.cols() != model.n_features) throw ContractError("predict: feature count mismatch");
  const auto classes = static_cast<std::size_t>(model.n_classes);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  std::vector<double> votes(classes);
  for (Index r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    const double* row = x.data() + r * x.cols();
    for (const auto& tree : model.trees) {
      const auto& leaf = tree.nodes[static_cast<std::size_t>(tree.leaf_of(row))];
      const auto* hist = tree.histograms.data() + static_cast<std::size_t>(leaf.leaf) * classes;
      for (std::size_t c = 0; c < classes; ++c) votes[c] += hist[c];
    }
    out[static_cast<std::size_t>(r)] =
        static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

}  // namespace fae
