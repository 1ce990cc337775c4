#include "msvc/sequential.hpp"

#include "msvc/error.hpp"
#include "msvc/linalg.hpp"
#include "msvc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msvc {

namespace {

std::vector<Eigen::Index> block_indices(Eigen::Index offset, Eigen::Index count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = offset + i;
  return idx;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

PerKCache build_cache(const CompressedMoments& moments, const ShrinkageParams& params,
                      Eigen::Index target) {
  const Eigen::Index k = moments.k();
  const Eigen::Index l = moments.l();
  const Eigen::Index kv = moments.kv();
  if (target < 0 || target >= kv) throw Error(ErrorCode::InvalidArgument, "target out of range");
  if (params.size() != kv) throw Error(ErrorCode::DimensionMismatch, "parameter count mismatch");

  PerKCache cache;
  cache.target = target;
  cache.k = k;
  cache.l = l;
  for (Eigen::Index j = 0; j < kv; ++j)
    if (j != target && !params.collapsed(j)) cache.others.push_back(j);

  std::vector<Eigen::Index> rest = block_indices(0, k);
  for (Eigen::Index j : cache.others) {
    const auto blk = block_indices(k + j * l, l);
    rest.insert(rest.end(), blk.begin(), blk.end());
  }
  const auto tgt = block_indices(k + target * l, l);
  const Eigen::Index rs = cache.rest_size();

  const Eigen::MatrixXd g = moments.gram();
  const Eigen::VectorXd c = moments.cross();

  cache.v_rest.resize(rs - k);
  for (std::size_t i = 0; i < cache.others.size(); ++i) {
    const auto j = static_cast<std::size_t>(cache.others[i]);
    cache.v_rest.segment(static_cast<Eigen::Index>(i) * l, l) =
        v_diag(params.rho[j], params.alpha[j], moments.lambda());
  }

  Eigen::MatrixXd a = g(rest, rest);
  a.diagonal().tail(rs - k).array() += cache.v_rest.array().square().inverse();
  const Eigen::MatrixXd b = g(rest, tgt);
  const Eigen::MatrixXd d = g(tgt, tgt);

  cache.q.resize(rs + l, rs + l);
  cache.q.topLeftCorner(rs, rs) = a;
  cache.q.topRightCorner(rs, l) = b;
  cache.q.bottomLeftCorner(l, rs) = b.transpose();
  cache.q.bottomRightCorner(l, l) = d;

  const SpdFactor q_factor(cache.q, ErrorCode::SingularBlock);
  cache.q_inv = symmetrized(q_factor.inverse());

  const SpdFactor a_factor(a, ErrorCode::SingularBlock);
  cache.schur = symmetrized(d - b.transpose() * a_factor.solve(b));
  cache.logdet_fixed = a_factor.log_determinant() + 2.0 * cache.v_rest.array().log().sum();
  cache.logdet_schur = q_factor.log_determinant() - a_factor.log_determinant();

  cache.m_rest = c(rest);
  cache.m_target = c(tgt);
  Eigen::VectorXd m(rs + l);
  m << cache.m_rest, cache.m_target;
  cache.w = q_factor.solve(m);
  return cache;
}

namespace {

// Target-dependent piece shared by the solve and the determinant:
// F = V_t^2 + Q*_tt. Since Q*_tt is the inverse of the Schur complement,
// ln|I + V_t S V_t| = ln|F| + ln|S|, so one factorization serves both.
struct TargetSolve {
  Eigen::VectorXd sol;
  double logdet_inner = 0.0;
};

TargetSolve solve_target(const PerKCache& cache, const Eigen::VectorXd& v_target) {
  const Eigen::Index rs = cache.rest_size();
  const Eigen::Index l = cache.l;
  Eigen::MatrixXd inner = cache.q_inv_target_target();
  inner.diagonal().array() += v_target.array().square();
  const SpdFactor inner_factor(inner, ErrorCode::SingularInnerMatrix);
  const Eigen::VectorXd z = inner_factor.solve(Eigen::VectorXd(cache.w.tail(l)));

  // Rest block: Vrest^-1 (w_rest - Q*_rt z). Target block: V_t^-1 (w_t - Q*_tt z)
  // simplifies to V_t z, which stays finite as V_t -> 0.
  TargetSolve out;
  out.sol.resize(rs + l);
  out.sol.head(rs) = cache.w.head(rs) - cache.q_inv_rest_target() * z;
  out.sol.segment(cache.k, rs - cache.k).array() /= cache.v_rest.array();
  out.sol.tail(l) = v_target.cwiseProduct(z);
  out.logdet_inner = inner_factor.log_determinant();
  return out;
}

}  // namespace

Eigen::VectorXd fast_solve(const PerKCache& cache, const Eigen::VectorXd& v_target) {
  return solve_target(cache, v_target).sol;
}

double fast_logdet(const PerKCache& cache, const Eigen::VectorXd& v_target) {
  Eigen::MatrixXd inner = v_target.asDiagonal() * cache.schur * v_target.asDiagonal();
  inner.diagonal().array() += 1.0;
  const SpdFactor factor(inner, ErrorCode::SingularInnerMatrix);
  return cache.logdet_fixed + factor.log_determinant();
}

LikelihoodResult fast_loglik(const PerKCache& cache, const CompressedMoments& moments, double rho,
                             double alpha) {
  const Eigen::Index k = cache.k;
  const Eigen::Index l = cache.l;
  const Eigen::VectorXd v = v_diag(rho, alpha, moments.lambda());
  const TargetSolve ts = solve_target(cache, v);
  const Eigen::VectorXd& sol = ts.sol;

  LikelihoodResult out;
  out.b_hat = sol.head(k);
  out.u_hat.assign(static_cast<std::size_t>(moments.kv()), Eigen::VectorXd::Zero(l));
  for (std::size_t i = 0; i < cache.others.size(); ++i)
    out.u_hat[static_cast<std::size_t>(cache.others[i])] = sol.segment(k + static_cast<Eigen::Index>(i) * l, l);
  out.u_hat[static_cast<std::size_t>(cache.target)] = sol.tail(l);

  // d = y'y - sol' [m0; V m_j; ...] because P sol equals that right-hand side.
  long double fitted = 0.0L;
  for (Eigen::Index i = 0; i < k; ++i) fitted += static_cast<long double>(sol(i)) * cache.m_rest(i);
  for (Eigen::Index i = k; i < cache.rest_size(); ++i)
    fitted += static_cast<long double>(sol(i)) * cache.v_rest(i - k) * cache.m_rest(i);
  for (Eigen::Index i = 0; i < l; ++i)
    fitted += static_cast<long double>(sol(cache.rest_size() + i)) * v(i) * cache.m_target(i);
  double u2 = 0.0;
  for (const auto& u : out.u_hat) u2 += u.squaredNorm();

  out.d_theta = static_cast<double>(static_cast<long double>(moments.myy()) - fitted);
  out.residual_ss = std::max(0.0, out.d_theta - u2);
  out.logdet_p = cache.logdet_fixed + cache.logdet_schur + ts.logdet_inner;
  out.loglik = restricted_loglik_value(out.logdet_p, out.d_theta, moments.n(), k, moments.myy());
  out.sigma2_hat = out.d_theta / static_cast<double>(moments.n() - k);
  return out;
}

StepResult optimize_coordinate(const std::function<double(double rho, double alpha)>& loglik,
                               double rho_in, double alpha_in, const SequentialOptions& options) {
  const double lo_rho = std::log(options.rho_min);
  const double hi_rho = std::log(options.rho_max);
  StepResult out;

  auto safe = [&](double rho, double alpha) {
    ++out.evaluations;
    try {
      const double f = loglik(rho, alpha);
      return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto clamp = [&](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(std::clamp(x(0), lo_rho, hi_rho),
                           std::clamp(x(1), options.alpha_min, options.alpha_max));
  };
  // Outside the box: value at the projection plus a pull back inside.
  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::Vector2d p = clamp(x);
    return -safe(std::exp(p(0)), p(1)) + (x - p).squaredNorm();
  };

  const double f_in = safe(rho_in, alpha_in);

  std::vector<Eigen::Vector2d> starts;
  for (const auto& s : options.starts) starts.emplace_back(s[0], s[1]);
  if (rho_in > 0.0) {
    const Eigen::Vector2d incoming(std::log(rho_in), alpha_in);
    const bool duplicate = std::any_of(starts.begin(), starts.end(), [&](const Eigen::Vector2d& s) {
      return (s - incoming).lpNorm<Eigen::Infinity>() < 1e-12;
    });
    if (!duplicate) starts.push_back(incoming);
  }

  NelderMeadOptions nm;
  nm.max_evaluations = std::max(8, options.evaluations_per_step / static_cast<int>(starts.size()));
  nm.initial_step = 0.5;
  nm.f_tolerance = 1e-10;
  nm.x_tolerance = 1e-6;

  Eigen::Vector2d best_x(std::log(std::max(rho_in, options.rho_min)), alpha_in);
  double best_f = -std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const NelderMeadResult r = nelder_mead(objective, s, nm);
    const Eigen::Vector2d p = clamp(r.x);
    const double f = safe(std::exp(p(0)), p(1));
    if (f > best_f) {
      best_f = f;
      best_x = p;
    }
  }

  const double f_zero = safe(0.0, best_x(1));
  StepResult candidate;
  if (best_x(0) <= lo_rho + 1e-3 || f_zero >= best_f) {
    candidate.rho = 0.0;
    candidate.alpha = best_x(1);
    candidate.loglik = f_zero;
    candidate.collapsed = true;
  } else {
    candidate.rho = std::exp(best_x(0));
    candidate.alpha = best_x(1);
    candidate.loglik = best_f;
  }

  if (candidate.loglik >= f_in - 1e-10 || !std::isfinite(f_in)) {
    out.rho = candidate.rho;
    out.alpha = candidate.alpha;
    out.loglik = candidate.loglik;
    out.collapsed = candidate.collapsed;
  } else {
    out.rho = rho_in;
    out.alpha = alpha_in;
    out.loglik = f_in;
    out.collapsed = rho_in == 0.0;
  }
  return out;
}

StepResult optimize_k(const PerKCache& cache, const CompressedMoments& moments,
                      const ShrinkageParams& params, Eigen::Index target,
                      const SequentialOptions& options) {
  if (cache.target != target) throw Error(ErrorCode::InvalidArgument, "cache built for another target");
  const auto t = static_cast<std::size_t>(target);
  return optimize_coordinate(
      [&](double rho, double alpha) { return fast_loglik(cache, moments, rho, alpha).loglik; },
      params.rho[t], params.alpha[t], options);
}

SequentialFit fit_sequential(const CompressedMoments& moments, const ShrinkageParams& init,
                             const SequentialOptions& options) {
  const Eigen::Index kv = moments.kv();
  if (init.size() != kv) throw Error(ErrorCode::DimensionMismatch, "parameter count mismatch");
  if (options.max_sweeps < 1) throw Error(ErrorCode::InvalidArgument, "max_sweeps must be >= 1");

  std::vector<Eigen::Index> order = options.sweep_order;
  if (order.empty())
    for (Eigen::Index j = 0; j < kv; ++j) order.push_back(j);

  SequentialFit fit;
  fit.params = init;
  FitTrace& trace = fit.trace;
  trace.evaluations.assign(static_cast<std::size_t>(kv), 0);

  double current = -std::numeric_limits<double>::infinity();
  try {
    current = compressed_restricted_loglik(moments, fit.params).loglik;
  } catch (const Error&) {
  }
  trace.sweep_loglik.push_back(current);

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (Eigen::Index j : order) {
      const auto ju = static_cast<std::size_t>(j);
      if (fit.params.collapsed(j)) continue;
      StepResult step;
      try {
        const PerKCache cache = build_cache(moments, fit.params, j);
        step = optimize_k(cache, moments, fit.params, j, options);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularBlock) throw;
        ++trace.fallback_steps;
        ShrinkageParams trial = fit.params;
        step = optimize_coordinate(
            [&](double rho, double alpha) {
              trial.rho[ju] = rho;
              trial.alpha[ju] = alpha;
              return compressed_restricted_loglik(moments, trial).loglik;
            },
            fit.params.rho[ju], fit.params.alpha[ju], options);
      }
      fit.params.rho[ju] = step.rho;
      fit.params.alpha[ju] = step.alpha;
      trace.evaluations[ju] += step.evaluations;
      if (step.collapsed) trace.collapsed.push_back(j);
      current = step.loglik;
      trace.step_loglik.push_back(current);
    }
    trace.sweeps = sweep;
    const double previous = trace.sweep_loglik.back();
    trace.sweep_loglik.push_back(current);

    const bool any_active = std::any_of(fit.params.rho.begin(), fit.params.rho.end(),
                                        [](double r) { return r > 0.0; });
    if (!any_active) {
      trace.converged = true;
      trace.reason = "all coefficients collapsed";
      break;
    }
    if (std::isfinite(previous) && current - previous < options.tol) {
      trace.converged = true;
      trace.reason = "loglik gain below tolerance";
      break;
    }
  }
  if (!trace.converged) trace.reason = "max sweeps reached";

  fit.result = compressed_restricted_loglik(moments, fit.params);
  return fit;
}

}  // namespace msvc
