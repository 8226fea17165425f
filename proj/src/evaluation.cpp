#include "fae/evaluation.hpp"

#include "fae/errors.hpp"

namespace fae {

LinearDecoder fit_linear_decoder(const Matrix& train, const SelectionResult& sel, double ridge) {
  if (sel.indices.empty()) throw ContractError("fit_linear_decoder: empty selection");
  if (train.rows() < sel.size()) throw ContractError("fit_linear_decoder: fewer rows than selected features");
  for (Index j : sel.indices) {
    if (j < 0 || j >= train.cols()) throw ContractError("fit_linear_decoder: index out of range");
  }
  const Matrix inputs = gather_columns(train, sel.indices);
  if (inputs.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("fit_linear_decoder: every selected column is identically zero");
  }
  return LinearDecoder{lstsq(inputs, train, ridge)};
}

double recon_error(const Matrix& test, const SelectionResult& sel, const LinearDecoder& dec) {
  if (dec.coef.rows() != sel.size() || dec.coef.cols() != test.cols()) {
    throw ContractError("recon_error: decoder shape does not match selection and data");
  }
  const Matrix inputs = gather_columns(test, sel.indices);
  Matrix residual = inputs * dec.coef;
  residual -= test;
  return mean_squared(residual);
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw ContractError("accuracy: length mismatch");
  if (pred.empty()) throw ContractError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace fae
