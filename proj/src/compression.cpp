#include "msvc/compression.hpp"

#include "msvc/error.hpp"

#include <string>

namespace msvc {

std::vector<Eigen::Index> SvcDesign::varying() const {
  std::vector<Eigen::Index> out;
  for (std::size_t k = 0; k < svc.size(); ++k)
    if (svc[k]) out.push_back(static_cast<Eigen::Index>(k));
  return out;
}

void SvcDesign::validate() const {
  const Eigen::Index n = X.rows();
  if (X.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "X has no columns");
  if (static_cast<Eigen::Index>(svc.size()) != X.cols())
    throw Error(ErrorCode::DimensionMismatch, "svc flags must match the columns of X");
  if (y.size() != n || E.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "X, E and y must have the same number of rows");
  if (lambda.size() != E.cols())
    throw Error(ErrorCode::DimensionMismatch, "lambda must match the columns of E");
  if (!X.allFinite() || !E.allFinite() || !y.allFinite() || !lambda.allFinite())
    throw Error(ErrorCode::NonFiniteInput, "design contains non-finite values");
  if (!(X.col(0).array() == 1.0).all())
    throw Error(ErrorCode::InvalidArgument, "first column of X must be the constant 1");
  if (!svc[0]) throw Error(ErrorCode::InvalidArgument, "the intercept coefficient must vary");
}

std::size_t CompressedMoments::pair_index(Eigen::Index i, Eigen::Index j) const {
  if (i > j) std::swap(i, j);
  const auto kv_ = static_cast<std::size_t>(kv());
  const auto a = static_cast<std::size_t>(i);
  const auto b = static_cast<std::size_t>(j);
  return a * kv_ - a * (a + 1) / 2 + b;
}

Eigen::MatrixXd CompressedMoments::mkk(Eigen::Index i, Eigen::Index j) const {
  const Eigen::MatrixXd& block = mkk_[pair_index(i, j)];
  if (i <= j) return block;
  return block.transpose();
}

Eigen::Index CompressedMoments::stored_scalars() const {
  Eigen::Index count = m00_.size() + m0_.size() + 1 + lambda_.size();
  for (const auto& m : m0k_) count += m.size();
  for (const auto& m : mkk_) count += m.size();
  for (const auto& m : mk_) count += m.size();
  return count;
}

Eigen::MatrixXd CompressedMoments::gram() const {
  const Eigen::Index kk = k();
  const Eigen::Index ll = l();
  const Eigen::Index dim = kk + kv() * ll;
  Eigen::MatrixXd g(dim, dim);
  g.topLeftCorner(kk, kk) = m00_;
  for (Eigen::Index i = 0; i < kv(); ++i) {
    g.block(0, kk + i * ll, kk, ll) = m0k_[static_cast<std::size_t>(i)];
    g.block(kk + i * ll, 0, ll, kk) = m0k_[static_cast<std::size_t>(i)].transpose();
    for (Eigen::Index j = i; j < kv(); ++j) {
      const Eigen::MatrixXd& block = mkk_[pair_index(i, j)];
      g.block(kk + i * ll, kk + j * ll, ll, ll) = block;
      if (j != i) g.block(kk + j * ll, kk + i * ll, ll, ll) = block.transpose();
    }
  }
  return g;
}

Eigen::VectorXd CompressedMoments::cross() const {
  const Eigen::Index kk = k();
  const Eigen::Index ll = l();
  Eigen::VectorXd c(kk + kv() * ll);
  c.head(kk) = m0_;
  for (Eigen::Index i = 0; i < kv(); ++i) c.segment(kk + i * ll, ll) = mk_[static_cast<std::size_t>(i)];
  return c;
}

CompressedMoments compress(const SvcDesign& design, Eigen::Index chunk_rows) {
  design.validate();
  if (chunk_rows < 1) chunk_rows = 4096;
  const Eigen::Index n = design.X.rows();
  const Eigen::Index k = design.X.cols();
  const Eigen::Index l = design.E.cols();
  const std::vector<Eigen::Index> varying = design.varying();
  const auto kv = static_cast<Eigen::Index>(varying.size());
  const Eigen::Index dim = k + kv * l;

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  double myy = 0.0;
  Eigen::MatrixXd w;
  for (Eigen::Index start = 0; start < n; start += chunk_rows) {
    const Eigen::Index rows = std::min(chunk_rows, n - start);
    w.resize(rows, dim);
    w.leftCols(k) = design.X.middleRows(start, rows);
    for (Eigen::Index j = 0; j < kv; ++j)
      w.middleCols(k + j * l, l) =
          design.E.middleRows(start, rows).array().colwise() *
          design.X.col(varying[static_cast<std::size_t>(j)]).segment(start, rows).array();
    const auto y = design.y.segment(start, rows);
    g.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    c.noalias() += w.transpose() * y;
    myy += y.squaredNorm();
  }
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();

  CompressedMoments m;
  m.n_ = n;
  m.varying_ = varying;
  m.lambda_ = design.lambda;
  m.m00_ = g.topLeftCorner(k, k);
  m.m0_ = c.head(k);
  m.myy_ = myy;
  for (Eigen::Index i = 0; i < kv; ++i) {
    m.m0k_.push_back(g.block(0, k + i * l, k, l));
    m.mk_.push_back(c.segment(k + i * l, l));
  }
  for (Eigen::Index i = 0; i < kv; ++i)
    for (Eigen::Index j = i; j < kv; ++j) m.mkk_.push_back(g.block(k + i * l, k + j * l, l, l));
  return m;
}

}  // namespace msvc
