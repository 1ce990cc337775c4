#pragma once

#include "msvc/error.hpp"

#include <Eigen/Dense>

namespace msvc {

/// Cholesky factorization of a symmetric positive (semi)definite matrix after
/// Jacobi equilibration. Reports failure through the given error code when the
/// factorization breaks down or the reciprocal condition of the equilibrated
/// matrix falls below 1 / max_condition.
class SpdFactor {
 public:
  SpdFactor(const Eigen::MatrixXd& a, ErrorCode on_failure, double max_condition = 1e12);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  Eigen::MatrixXd inverse() const;
  double log_determinant() const noexcept { return logdet_; }
  Eigen::Index size() const noexcept { return scale_.size(); }

 private:
  Eigen::VectorXd scale_;  // 1 / sqrt(diag(a))
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double logdet_ = 0.0;
};

}  // namespace msvc
