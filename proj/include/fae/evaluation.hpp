#pragma once

#include <cstdint>
#include <vector>

#include "fae/linalg.hpp"
#include "fae/model.hpp"

namespace fae {

/// Least-squares map from the selected columns to every column (k x m).
struct LinearDecoder {
  Matrix coef;
};

/// Fits coef = lstsq(train[:, sel], train, ridge). Throws NumericalError for
/// a degenerate selection (e.g. all selected columns constant zero).
LinearDecoder fit_linear_decoder(const Matrix& train, const SelectionResult& sel,
                                 double ridge = 1e-8);

/// meanSq(test - test[:, sel] * coef) over all n*m entries.
double recon_error(const Matrix& test, const SelectionResult& sel, const LinearDecoder& dec);

/// Fraction of positions where pred == truth. Throws ContractError on a
/// length mismatch or empty input.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace fae
