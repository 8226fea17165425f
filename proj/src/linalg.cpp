#include "fae/linalg.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fae/errors.hpp"

namespace fae {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: shape mismatch " << a.rows() << "x" << a.cols() << " * " << b.rows() << "x"
        << b.cols();
    throw ContractError(msg.str());
  }
  Matrix c(a.rows(), b.cols());
  c.noalias() = a * b;
  return c;
}

Matrix lstsq(const Matrix& a, const Matrix& b, double ridge) {
  if (a.rows() != b.rows()) {
    throw ContractError("lstsq: a and b must have the same number of rows");
  }
  if (!(ridge >= 0.0)) {
    throw ContractError("lstsq: ridge must be non-negative");
  }
  Matrix gram(a.cols(), a.cols());
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram.diagonal().array() += ridge;
  Matrix rhs(a.cols(), b.cols());
  rhs.noalias() = a.transpose() * b;

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
                           .eigenvalues();
    std::ostringstream msg;
    msg << "lstsq: normal matrix not positive definite (ridge " << ridge << ", eigenvalue range ["
        << eig.minCoeff() << ", " << eig.maxCoeff() << "])";
    throw NumericalError(msg.str());
  }
  Matrix w = llt.solve(rhs);
  if (!w.allFinite()) {
    throw NumericalError("lstsq: non-finite solution; system is singular");
  }
  return w;
}

double mean_squared(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.squaredNorm() / static_cast<double>(m.size());
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

Matrix gather_columns(const Matrix& x, const std::vector<Index>& columns) {
  Matrix out(x.rows(), static_cast<Index>(columns.size()));
  for (Index r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) out(r, static_cast<Index>(j)) = x(r, columns[j]);
  }
  return out;
}

}  // namespace fae
