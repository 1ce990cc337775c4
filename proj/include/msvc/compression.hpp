#pragma once

#include <Eigen/Dense>

#include <vector>

namespace msvc {

/// Design of a Moran-eigenvector SVC regression. Column 0 of X is the
/// intercept and always varies; its varying part doubles as the residual
/// spatial-dependence term.
struct SvcDesign {
  Eigen::MatrixXd X;         // N x K, X.col(0) == 1
  std::vector<bool> svc;     // K flags, svc[0] == true
  Eigen::MatrixXd E;         // N x L basis
  Eigen::VectorXd lambda;    // L eigenvalues of the basis
  Eigen::VectorXd y;         // N

  /// Covariate indices whose coefficients vary, ascending.
  std::vector<Eigen::Index> varying() const;
  /// Validates shapes, finiteness and the intercept convention.
  void validate() const;
};

/// The N-free inner products that fully determine the restricted likelihood.
/// Varying coefficients are addressed by their position j in `varying`.
class CompressedMoments {
 public:
  Eigen::Index n() const noexcept { return n_; }
  Eigen::Index k() const noexcept { return m00_.rows(); }
  Eigen::Index l() const noexcept { return lambda_.size(); }
  Eigen::Index kv() const noexcept { return static_cast<Eigen::Index>(varying_.size()); }
  const std::vector<Eigen::Index>& varying() const noexcept { return varying_; }
  const Eigen::VectorXd& lambda() const noexcept { return lambda_; }

  const Eigen::MatrixXd& m00() const noexcept { return m00_; }
  /// X'(x_k o E) for varying position j; K x L.
  const Eigen::MatrixXd& m0k(Eigen::Index j) const { return m0k_[static_cast<std::size_t>(j)]; }
  /// (x_k o E)'(x_k~ o E) for varying positions (i, j); L x L.
  Eigen::MatrixXd mkk(Eigen::Index i, Eigen::Index j) const;
  const Eigen::VectorXd& m0() const noexcept { return m0_; }
  const Eigen::VectorXd& mk(Eigen::Index j) const { return mk_[static_cast<std::size_t>(j)]; }
  double myy() const noexcept { return myy_; }

  /// Number of stored scalars (blocks plus lambda).
  Eigen::Index stored_scalars() const;

  /// Full (K + Kv L)^2 Gram matrix [X, x_k o E, ...]'[X, x_k o E, ...].
  Eigen::MatrixXd gram() const;
  /// Matching right-hand side [X'y; (x_k o E)'y; ...].
  Eigen::VectorXd cross() const;

  friend CompressedMoments compress(const SvcDesign& design, Eigen::Index chunk_rows);

 private:
  Eigen::Index n_ = 0;
  std::vector<Eigen::Index> varying_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd m00_;
  std::vector<Eigen::MatrixXd> m0k_;
  std::vector<Eigen::MatrixXd> mkk_;  // upper triangle, row-major over (i <= j)
  Eigen::VectorXd m0_;
  std::vector<Eigen::VectorXd> mk_;
  double myy_ = 0.0;

  std::size_t pair_index(Eigen::Index i, Eigen::Index j) const;
};

/// One streaming pass over the rows of the design.
CompressedMoments compress(const SvcDesign& design, Eigen::Index chunk_rows = 4096);

}  // namespace msvc
