#include "msvc/eigenbasis.hpp"

#include "msvc/error.hpp"

#include <cmath>
#include <string>

namespace msvc {

CenteredEigen centered_eigen(const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  CenteredEigen out;
  if (n < 2) {
    out.values.resize(0);
    out.vectors.resize(n, 0);
    return out;
  }
  // Householder reflector H with H 1 = -sqrt(n) e_1; columns 2..n of H span 1-perp.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  w(0) += std::sqrt(static_cast<double>(n));
  const double beta = 2.0 / w.squaredNorm();
  const Eigen::VectorXd p = c * w;
  const double wp = w.dot(p);
  Eigen::MatrixXd hch = c;
  hch.noalias() -= beta * w * p.transpose();
  hch.noalias() -= beta * p * w.transpose();
  hch.noalias() += (beta * beta * wp) * w * w.transpose();
  const Eigen::MatrixXd inner = 0.5 * (hch.bottomRightCorner(n - 1, n - 1) +
                                       hch.bottomRightCorner(n - 1, n - 1).transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(inner);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::DegenerateKernel, "symmetric eigendecomposition failed");

  // Eigen returns ascending order; flip to descending and lift back to R^n.
  const Eigen::Index m = n - 1;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, m);
  for (Eigen::Index l = 0; l < m; ++l) {
    Eigen::VectorXd x(n);
    x(0) = 0.0;
    x.tail(m) = solver.eigenvectors().col(m - 1 - l);
    const double s = beta * w.dot(x);
    out.vectors.col(l) = x - s * w;
  }
  return out;
}

namespace {

Eigen::Index count_positive(const Eigen::VectorXd& values, double tol, Eigen::Index cap) {
  if (values.size() == 0 || !(values(0) > 0.0)) return 0;
  const double threshold = tol * values(0);
  Eigen::Index count = 0;
  while (count < values.size() && values(count) > threshold) ++count;
  return std::min(count, cap);
}

/// Flip each column so its largest-magnitude entry is positive; returns the signs.
Eigen::VectorXd normalize_signs(Eigen::MatrixXd& e) {
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(e.cols());
  for (Eigen::Index l = 0; l < e.cols(); ++l) {
    Eigen::Index arg = 0;
    e.col(l).cwiseAbs().maxCoeff(&arg);
    if (e(arg, l) < 0.0) {
      e.col(l) = -e.col(l);
      signs(l) = -1.0;
    }
  }
  return signs;
}

Eigen::MatrixXd nystrom_rows(const CoordinateSet& sites, const CoordinateSet& knots, double r,
                             const Eigen::MatrixXd& knot_vectors, const Eigen::VectorXd& knot_lambda,
                             const Eigen::RowVectorXd& row_mean) {
  Eigen::MatrixXd c_nl = proximity(sites, knots, r, DiagonalPolicy::kernel);
  c_nl.rowwise() -= row_mean;
  Eigen::MatrixXd e = c_nl * knot_vectors;
  e.array().rowwise() /= (knot_lambda.array() + 1.0).transpose();
  return e;
}

}  // namespace

EigenBasis exact_basis(const CoordinateSet& coords, double r, const BasisOptions& options) {
  const Eigen::Index n = coords.size();
  if (n > options.exact_size_guard)
    throw Error(ErrorCode::SizeGuardExceeded,
                "exact basis limited to N <= " + std::to_string(options.exact_size_guard));
  const Eigen::MatrixXd c = proximity(coords, coords, r, DiagonalPolicy::zero);
  const CenteredEigen eig = centered_eigen(c);
  const Eigen::Index l = count_positive(eig.values, options.positive_tol, options.max_rank);
  if (l == 0) throw Error(ErrorCode::DegenerateKernel, "no positive eigenvalues");

  EigenBasis basis;
  basis.kind = BasisKind::exact;
  basis.r = r;
  basis.E = eig.vectors.leftCols(l);
  basis.lambda = eig.values.head(l);
  normalize_signs(basis.E);
  return basis;
}

EigenBasis nystrom_basis(const CoordinateSet& coords, const KnotSet& knots, double r,
                         const BasisOptions& options) {
  const Eigen::Index n = coords.size();
  const Eigen::Index lk = knots.size();
  if (lk < 2 || lk > options.knot_guard)
    throw Error(ErrorCode::InvalidKnotCount,
                "knot count must lie in [2, " + std::to_string(options.knot_guard) + "]");
  if (!(r > 0.0)) throw Error(ErrorCode::NonPositiveRange, "kernel range must be positive");

  const Eigen::MatrixXd c_l = proximity(knots.centers, knots.centers, r, DiagonalPolicy::zero);
  const CenteredEigen eig = centered_eigen(c_l);

  const double scale = static_cast<double>(lk + n) / static_cast<double>(lk);
  const Eigen::VectorXd approx = (scale * (eig.values.array() + 1.0) - 1.0).matrix();
  const Eigen::Index l = count_positive(approx, options.positive_tol, options.max_rank);
  if (l == 0) throw Error(ErrorCode::DegenerateKernel, "no positive approximated eigenvalues");
  for (Eigen::Index j = 0; j < l; ++j)
    if (!(eig.values(j) + 1.0 > 0.0))
      throw Error(ErrorCode::SingularCorrection, "knot eigenvalue + 1 is not positive");

  EigenBasis basis;
  basis.kind = BasisKind::nystrom;
  basis.r = r;
  basis.knots = knots;
  basis.knot_vectors = eig.vectors.leftCols(l);
  basis.knot_lambda = eig.values.head(l);
  basis.lambda = approx.head(l);
  basis.knot_row_mean = ((c_l.colwise().sum().array() + 1.0) / static_cast<double>(lk)).matrix();
  basis.E = nystrom_rows(coords, knots.centers, r, basis.knot_vectors, basis.knot_lambda,
                         basis.knot_row_mean);
  const Eigen::VectorXd signs = normalize_signs(basis.E);
  for (Eigen::Index j = 0; j < l; ++j)
    if (signs(j) < 0.0) basis.knot_vectors.col(j) = -basis.knot_vectors.col(j);
  return basis;
}

Eigen::MatrixXd basis_at(const EigenBasis& basis, const CoordinateSet& new_coords) {
  if (basis.kind != BasisKind::nystrom || !basis.knots)
    throw Error(ErrorCode::MissingKnots, "basis evaluation at new sites needs a Nystrom basis");
  return nystrom_rows(new_coords, basis.knots->centers, basis.r, basis.knot_vectors,
                      basis.knot_lambda, basis.knot_row_mean);
}

double moran_coefficient(const Eigen::VectorXd& y, const Eigen::MatrixXd& c) {
  const Eigen::Index n = y.size();
  if (c.rows() != n || c.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "proximity matrix must be N x N");
  const Eigen::VectorXd z = y.array() - y.mean();
  const double ss = z.squaredNorm();
  if (ss <= 1e-20 * std::max(1.0, y.squaredNorm()))
    throw Error(ErrorCode::ConstantVector, "Moran coefficient undefined for a constant vector");
  return static_cast<double>(n) / c.sum() * z.dot(c * z) / ss;
}

}  // namespace msvc
