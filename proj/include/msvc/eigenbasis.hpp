#pragma once

#include "msvc/geometry.hpp"

#include <Eigen/Dense>

#include <optional>

namespace msvc {

enum class BasisKind { exact, nystrom };

/// Moran eigenvectors (exact or Nystrom-approximated) restricted to positive
/// eigenvalues, columns ordered by descending eigenvalue.
struct EigenBasis {
  BasisKind kind = BasisKind::exact;
  Eigen::MatrixXd E;       // N x L
  Eigen::VectorXd lambda;  // L, descending, all > 0
  double r = 0.0;          // kernel range

  // Present only for kind == nystrom; everything basis_at needs.
  std::optional<KnotSet> knots;
  Eigen::MatrixXd knot_vectors;     // L_knots x L, retained knot eigenvectors
  Eigen::VectorXd knot_lambda;      // L, matching knot eigenvalues
  Eigen::RowVectorXd knot_row_mean; // 1'(C_L + I) / L_knots

  Eigen::Index rows() const noexcept { return E.rows(); }
  Eigen::Index rank() const noexcept { return E.cols(); }
};

struct BasisOptions {
  /// Eigenvalues above positive_tol * max eigenvalue count as positive.
  double positive_tol = 1e-8;
  Eigen::Index max_rank = 200;
  /// Largest N accepted by the dense exact decomposition.
  Eigen::Index exact_size_guard = 5000;
  Eigen::Index knot_guard = 2000;
};

/// Eigen-pairs of the doubly centered matrix (I - 11'/n) C (I - 11'/n),
/// computed on the orthogonal complement of 1 so every returned vector has
/// zero mean. n - 1 pairs, eigenvalues descending.
struct CenteredEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
CenteredEigen centered_eigen(const Eigen::MatrixXd& c);

EigenBasis exact_basis(const CoordinateSet& coords, double r, const BasisOptions& options = {});

EigenBasis nystrom_basis(const CoordinateSet& coords, const KnotSet& knots, double r,
                         const BasisOptions& options = {});

/// Nystrom basis evaluated at arbitrary sites with the stored knot solution.
Eigen::MatrixXd basis_at(const EigenBasis& basis, const CoordinateSet& new_coords);

/// Moran coefficient of y under the square proximity matrix c.
double moran_coefficient(const Eigen::VectorXd& y, const Eigen::MatrixXd& c);

}  // namespace msvc
