#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fae {

/// Dense row-major storage; one row per sample, one column per feature.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Standard matrix product. Throws ContractError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// Solves min ||aW - b||_F^2 + ridge ||W||_F^2 through the normal equations
/// (a^T a + ridge I) W = a^T b and a Cholesky factorization.
///
/// The default ridge only conditions the system; callers that need the
/// unregularized solution of a full-rank problem may pass 0. Throws
/// NumericalError (with a condition estimate) when the factorization fails.
Matrix lstsq(const Matrix& a, const Matrix& b, double ridge = 1e-8);

/// ||m||_F^2 / (rows * cols).
double mean_squared(const Matrix& m);

/// Throws NumericalError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

/// Copies the listed columns of `x`, in order.
Matrix gather_columns(const Matrix& x, const std::vector<Index>& columns);

}  // namespace fae
