#include "msvc/linalg.hpp"

#include <cmath>

namespace msvc {

SpdFactor::SpdFactor(const Eigen::MatrixXd& a, ErrorCode on_failure, double max_condition) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "factorization needs a square matrix");
  if (!a.allFinite()) throw Error(on_failure, "matrix has non-finite entries");
  scale_.resize(n);
  double log_scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a(i, i);
    if (!(d > 0.0)) throw Error(on_failure, "non-positive diagonal entry");
    scale_(i) = 1.0 / std::sqrt(d);
    log_scale += std::log(d);
  }
  Eigen::MatrixXd eq = scale_.asDiagonal() * a * scale_.asDiagonal();
  llt_.compute(eq);
  if (llt_.info() != Eigen::Success) throw Error(on_failure, "matrix is not positive definite");
  if (llt_.rcond() < 1.0 / max_condition) throw Error(on_failure, "matrix is numerically singular");
  const auto diag = llt_.matrixLLT().diagonal();
  logdet_ = log_scale;
  for (Eigen::Index i = 0; i < n; ++i) logdet_ += 2.0 * std::log(diag(i));
}

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const {
  return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * b);
}

Eigen::MatrixXd SpdFactor::solve(const Eigen::MatrixXd& b) const {
  return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * b);
}

Eigen::MatrixXd SpdFactor::inverse() const {
  return solve(Eigen::MatrixXd::Identity(size(), size()).eval());
}

}  // namespace msvc
