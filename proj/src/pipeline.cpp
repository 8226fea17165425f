#include "fae/pipeline.hpp"

#include <limits>

#include "fae/evaluation.hpp"
#include "fae/hfae.hpp"

namespace fae {

TrainedModel train_method(const std::string& method, const Matrix& train, const Matrix& val,
                          const Hyperparams& hp, const std::optional<HierarchyParams>& hierarchy) {
  if (method == "hfae") {
    if (!hierarchy) throw ContractError("train_method: hfae needs hierarchy parameters");
    HfaeResult r = train_hfae(train, val, *hierarchy, hp);
    return {make_checkpoint(method, r.params, r.report, hierarchy), std::move(r.report)};
  }
  TrainResult r;
  if (method == "fae") {
    r = train_fae(train, val, hp);
  } else if (method == "iae") {
    r = train_iae(train, val, hp);
  } else if (method == "ae") {
    r = train_ae(train, val, hp);
  } else {
    throw ContractError("unknown method '" + method + "' (expected fae, iae, ae or hfae)");
  }
  return {make_checkpoint(method, r.params, r.report), std::move(r.report)};
}

SelectionMetrics evaluate_selection(const Dataset& train, const Dataset& test,
                                    const SelectionResult& sel, const ExtraTreesParams& forest) {
  if (train.features() != test.features()) throw ContractError("evaluate_selection: feature count mismatch");
  SelectionMetrics out;
  const LinearDecoder dec = fit_linear_decoder(train.x, sel);
  out.recon_mse = recon_error(test.x, sel, dec);
  if (!train.labels || !test.labels) {
    out.accuracy = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const ExtraTreesModel model = fit_extra_trees(gather_columns(train.x, sel.indices), *train.labels, forest);
  out.accuracy = accuracy(predict(model, gather_columns(test.x, sel.indices)), *test.labels);
  return out;
}

SelectionResult union_selection(const std::vector<SelectionResult>& groups) {
  SelectionResult out;
  for (const auto& g : groups) {
    out.indices.insert(out.indices.end(), g.indices.begin(), g.indices.end());
    out.weights.insert(out.weights.end(), g.weights.begin(), g.weights.end());
  }
  return out;
}

}  // namespace fae
