#include "msvc/model.hpp"

#include "msvc/error.hpp"

#include <algorithm>
#include <chrono>
#include <string>

namespace msvc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<bool> svc_flags(const SpatialDataset& data) {
  if (data.svc.empty()) return std::vector<bool>(static_cast<std::size_t>(data.X.cols()), true);
  return data.svc;
}

}  // namespace

void SpatialDataset::validate() const {
  const Eigen::Index n = y.size();
  if (coords.size() != n || X.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "coordinates, y and X must have the same number of rows");
  if (X.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "X has no columns");
  if (!svc.empty() && static_cast<Eigen::Index>(svc.size()) != X.cols())
    throw Error(ErrorCode::DimensionMismatch, "svc flags must match the columns of X");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != X.cols())
    throw Error(ErrorCode::DimensionMismatch, "names must match the columns of X");
  if (!y.allFinite() || !X.allFinite()) throw Error(ErrorCode::NonFiniteInput, "y or X contains non-finite values");
  if (n <= X.cols()) throw Error(ErrorCode::InsufficientData, "need more sites than covariates");
}

EigenBasis build_basis(const CoordinateSet& coords, const FitOptions& options) {
  const Eigen::Index n = coords.size();
  const double r = options.range > 0.0 ? options.range : mst_max_edge(coords, options.mst);
  bool exact = options.basis == BasisChoice::exact;
  if (options.basis == BasisChoice::automatic) exact = n <= options.auto_exact_max;
  if (exact) return exact_basis(coords, r, options.basis_options);

  const Eigen::Index knot_count = options.knot_count > 0 ? options.knot_count : std::min<Eigen::Index>(200, n);
  if (knot_count > options.basis_options.knot_guard)
    throw Error(ErrorCode::InvalidKnotCount,
                "knot count above " + std::to_string(options.basis_options.knot_guard));
  const KnotSet knots = kmeans_knots(coords, knot_count, options.seed);
  return nystrom_basis(coords, knots, r, options.basis_options);
}

Eigen::MatrixXd reconstruct_svc(const Eigen::MatrixXd& E, const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& b_hat, const std::vector<Eigen::Index>& varying,
                                const ShrinkageParams& params, const std::vector<Eigen::VectorXd>& u_hat) {
  const auto kv = static_cast<Eigen::Index>(varying.size());
  if (E.cols() != lambda.size() || params.size() != kv || static_cast<Eigen::Index>(u_hat.size()) != kv)
    throw Error(ErrorCode::DimensionMismatch, "basis, parameters and random effects disagree");
  Eigen::MatrixXd beta = b_hat.transpose().replicate(E.rows(), 1);
  for (Eigen::Index j = 0; j < kv; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const Eigen::Index col = varying[ju];
    if (col < 0 || col >= b_hat.size() || u_hat[ju].size() != E.cols())
      throw Error(ErrorCode::DimensionMismatch, "random effect size does not match the basis");
    if (params.rho[ju] == 0.0) continue;
    const Eigen::VectorXd gamma = v_diag(params.rho[ju], params.alpha[ju], lambda).cwiseProduct(u_hat[ju]);
    beta.col(col) += E * gamma;
  }
  return beta;
}

double residual_variance(const SvcFit& fit) {
  return fit.d_theta / static_cast<double>(fit.n - fit.b_hat.size());
}

SvcFit fit_with_basis(const SpatialDataset& data, const EigenBasis& basis, const FitOptions& options) {
  data.validate();
  if (basis.rows() != data.size())
    throw Error(ErrorCode::DimensionMismatch, "basis rows do not match the dataset");

  SvcFit out;
  out.basis = basis;
  out.n = data.size();

  auto start = Clock::now();
  SvcDesign design{data.X, svc_flags(data), basis.E, basis.lambda, data.y};
  const CompressedMoments moments = compress(design);
  out.times.compress_s = seconds_since(start);

  start = Clock::now();
  out.varying = moments.varying();
  const ShrinkageParams init = ShrinkageParams::uniform(moments.kv(), options.init_rho, options.init_alpha);
  SequentialFit seq = fit_sequential(moments, init, options.sequential);
  out.params = std::move(seq.params);
  out.trace = std::move(seq.trace);
  out.b_hat = seq.result.b_hat;
  out.u_hat = seq.result.u_hat;
  out.loglik = seq.result.loglik;
  out.d_theta = seq.result.d_theta;
  out.sigma2_hat = seq.result.sigma2_hat;
  out.beta = reconstruct_svc(basis.E, basis.lambda, out.b_hat, out.varying, out.params, out.u_hat);
  out.times.estimate_s = seconds_since(start);
  return out;
}

SvcFit fit(const SpatialDataset& data, const FitOptions& options) {
  data.validate();
  const auto start = Clock::now();
  const EigenBasis basis = build_basis(data.coords, options);
  const double basis_s = seconds_since(start);
  SvcFit out = fit_with_basis(data, basis, options);
  out.times.basis_s = basis_s;
  return out;
}

}  // namespace msvc
