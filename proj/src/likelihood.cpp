#include "msvc/likelihood.hpp"

#include "msvc/error.hpp"
#include "msvc/linalg.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace msvc {

Eigen::VectorXd v_diag(double rho, double alpha, const Eigen::VectorXd& lambda) {
  if ((lambda.array() <= 0.0).any())
    throw Error(ErrorCode::NonPositiveEigenvalue, "eigenvalues must be positive");
  if (rho == 0.0) return Eigen::VectorXd::Zero(lambda.size());
  return rho * lambda.array().pow(0.5 * alpha).matrix();
}

double restricted_loglik_value(double logdet_p, double d_theta, Eigen::Index n, Eigen::Index k,
                               double myy) {
  if (n <= k) throw Error(ErrorCode::InsufficientData, "need N > K");
  if (!(d_theta > 1e-12 * std::max(myy, std::numeric_limits<double>::min())))
    throw Error(ErrorCode::PerfectFit, "d(theta) is zero; the model interpolates y");
  const double dof = static_cast<double>(n - k);
  return -0.5 * logdet_p - 0.5 * dof * (1.0 + std::log(2.0 * std::numbers::pi * d_theta / dof));
}

namespace {

void check_params(const ShrinkageParams& params, Eigen::Index kv) {
  if (params.size() != kv || static_cast<Eigen::Index>(params.alpha.size()) != kv)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(kv) + " shrinkage parameter pairs");
  for (std::size_t j = 0; j < params.rho.size(); ++j)
    if (!(params.rho[j] >= 0.0) || !std::isfinite(params.rho[j]) || !std::isfinite(params.alpha[j]))
      throw Error(ErrorCode::InvalidArgument, "rho must be finite and nonnegative");
}

/// Diagonal scaling [1 (K); v_1; ...; v_Kv] that maps the Gram matrix onto P.
Eigen::VectorXd p_scaling(Eigen::Index k, const Eigen::VectorXd& lambda, const ShrinkageParams& params) {
  const Eigen::Index l = lambda.size();
  Eigen::VectorXd s(k + params.size() * l);
  s.head(k).setOnes();
  for (Eigen::Index j = 0; j < params.size(); ++j)
    s.segment(k + j * l, l) =
        v_diag(params.rho[static_cast<std::size_t>(j)], params.alpha[static_cast<std::size_t>(j)], lambda);
  return s;
}

void unpack(const Eigen::VectorXd& sol, Eigen::Index k, Eigen::Index l, Eigen::Index kv,
            LikelihoodResult& out) {
  out.b_hat = sol.head(k);
  out.u_hat.clear();
  for (Eigen::Index j = 0; j < kv; ++j) out.u_hat.push_back(sol.segment(k + j * l, l));
}

double u_norm2(const LikelihoodResult& r) {
  double s = 0.0;
  for (const auto& u : r.u_hat) s += u.squaredNorm();
  return s;
}

}  // namespace

LikelihoodResult direct_restricted_loglik(const SvcDesign& design, const ShrinkageParams& params,
                                          const DirectOptions& options) {
  design.validate();
  const Eigen::Index n = design.X.rows();
  const Eigen::Index k = design.X.cols();
  const Eigen::Index l = design.E.cols();
  if (n > options.size_guard)
    throw Error(ErrorCode::SizeGuardExceeded,
                "direct likelihood limited to N <= " + std::to_string(options.size_guard));
  const std::vector<Eigen::Index> varying = design.varying();
  const auto kv = static_cast<Eigen::Index>(varying.size());
  check_params(params, kv);

  // Z = [X, (x_k o E) V_k, ...]
  const Eigen::VectorXd s = p_scaling(k, design.lambda, params);
  Eigen::MatrixXd z(n, k + kv * l);
  z.leftCols(k) = design.X;
  for (Eigen::Index j = 0; j < kv; ++j) {
    const Eigen::VectorXd& x = design.X.col(varying[static_cast<std::size_t>(j)]);
    z.middleCols(k + j * l, l) =
        (design.E.array().colwise() * x.array()).rowwise() * s.segment(k + j * l, l).array().transpose();
  }
  Eigen::MatrixXd p = z.transpose() * z;
  p.diagonal().tail(kv * l).array() += 1.0;
  const Eigen::VectorXd rhs = z.transpose() * design.y;

  const SpdFactor factor(p, ErrorCode::SingularP);
  const Eigen::VectorXd sol = factor.solve(rhs);

  LikelihoodResult out;
  unpack(sol, k, l, kv, out);
  const Eigen::VectorXd resid = design.y - z * sol;
  out.residual_ss = resid.squaredNorm();
  out.d_theta = out.residual_ss + u_norm2(out);
  out.logdet_p = factor.log_determinant();
  out.loglik = restricted_loglik_value(out.logdet_p, out.d_theta, n, k, design.y.squaredNorm());
  out.sigma2_hat = out.d_theta / static_cast<double>(n - k);
  return out;
}

LikelihoodResult compressed_restricted_loglik(const CompressedMoments& moments,
                                              const ShrinkageParams& params) {
  const Eigen::Index k = moments.k();
  const Eigen::Index l = moments.l();
  const Eigen::Index kv = moments.kv();
  check_params(params, kv);

  const Eigen::VectorXd s = p_scaling(k, moments.lambda(), params);
  // P0 = S G S; P = P0 + blockdiag(0, I)
  Eigen::MatrixXd p0 = s.asDiagonal() * moments.gram() * s.asDiagonal();
  Eigen::MatrixXd p = p0;
  p.diagonal().tail(kv * l).array() += 1.0;
  const Eigen::VectorXd rhs = s.cwiseProduct(moments.cross());

  const SpdFactor factor(p, ErrorCode::SingularP);
  const Eigen::VectorXd sol = factor.solve(rhs);

  LikelihoodResult out;
  unpack(sol, k, l, kv, out);

  // ||eps||^2 = myy - 2 sol'rhs + sol' P0 sol, accumulated in extended precision
  const Eigen::VectorXd p0_sol = p0 * sol;
  long double cross_term = 0.0L;
  long double quad_term = 0.0L;
  for (Eigen::Index i = 0; i < sol.size(); ++i) {
    cross_term += static_cast<long double>(sol(i)) * rhs(i);
    quad_term += static_cast<long double>(sol(i)) * p0_sol(i);
  }
  const long double myy = moments.myy();
  double eps2 = static_cast<double>(myy - 2.0L * cross_term + quad_term);
  if (eps2 < 0.0) {
    if (eps2 < -1e-6 * moments.myy())
      throw Error(ErrorCode::NegativeResidualNorm, "residual norm evaluated to a negative value");
    eps2 = 0.0;
  }
  out.residual_ss = eps2;
  out.d_theta = eps2 + u_norm2(out);
  out.logdet_p = factor.log_determinant();
  out.loglik = restricted_loglik_value(out.logdet_p, out.d_theta, moments.n(), k, moments.myy());
  out.sigma2_hat = out.d_theta / static_cast<double>(moments.n() - k);
  return out;
}

}  // namespace msvc
