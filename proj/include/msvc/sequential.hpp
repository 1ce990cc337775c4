#pragma once

#include "msvc/compression.hpp"
#include "msvc/likelihood.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace msvc {

/// Everything the restricted likelihood needs when only the target
/// coefficient's (rho, alpha) changes. Built once per coordinate step.
///
/// Ordering: the "rest" block stacks b (K) and the u-blocks of every other
/// non-collapsed varying coefficient; the target u-block (L) comes last.
/// Q = [[M_rr + blockdiag(0, V_j^-2), M_rt], [M_tr, M_tt]].
struct PerKCache {
  Eigen::Index target = 0;           // varying position being optimized
  std::vector<Eigen::Index> others;  // non-collapsed, non-target positions
  Eigen::Index k = 0;
  Eigen::Index l = 0;

  Eigen::MatrixXd q;
  Eigen::MatrixXd q_inv;
  Eigen::MatrixXd schur;        // M_tt - M_tr A^-1 M_rt, A = Q rest block
  double logdet_fixed = 0.0;    // 2 ln|V_rest| + ln|A|
  double logdet_schur = 0.0;    // ln|schur|
  Eigen::VectorXd v_rest;       // V diagonals of the other coefficients, stacked
  Eigen::VectorXd m_rest;       // [m0; m_j ...]
  Eigen::VectorXd m_target;
  Eigen::VectorXd w;            // Q^-1 [m_rest; m_target]

  Eigen::Index rest_size() const noexcept { return k + static_cast<Eigen::Index>(others.size()) * l; }
  auto q_inv_rest_rest() const { return q_inv.topLeftCorner(rest_size(), rest_size()); }
  auto q_inv_rest_target() const { return q_inv.topRightCorner(rest_size(), l); }
  auto q_inv_target_rest() const { return q_inv.bottomLeftCorner(l, rest_size()); }
  auto q_inv_target_target() const { return q_inv.bottomRightCorner(l, l); }
};

/// Throws SingularBlock when Q or its rest block cannot be factorized.
PerKCache build_cache(const CompressedMoments& moments, const ShrinkageParams& params,
                      Eigen::Index target);

/// Coefficient solve through the Woodbury expansion: only the L x L matrix
/// diag(v_target^2) + Q*_tt is factorized. Returns [b; u_others...; u_target]
/// in cache order.
Eigen::VectorXd fast_solve(const PerKCache& cache, const Eigen::VectorXd& v_target);

/// log|P| via the block determinant expansion
/// logdet_fixed + 2 ln|V_t| + ln|V_t^-2 + schur|, evaluated as
/// logdet_fixed + ln|I + V_t schur V_t| so that V_t -> 0 is well defined.
double fast_logdet(const PerKCache& cache, const Eigen::VectorXd& v_target);

/// Restricted log-likelihood with the target's parameters replaced by (rho, alpha).
LikelihoodResult fast_loglik(const PerKCache& cache, const CompressedMoments& moments, double rho,
                             double alpha);

struct SequentialOptions {
  double alpha_min = 0.0;
  double alpha_max = 4.0;
  double rho_min = 1e-6;
  double rho_max = 1e6;
  int evaluations_per_step = 120;
  /// (log rho, alpha) simplex starts for each coordinate step.
  std::vector<std::array<double, 2>> starts = {{{-2.302585092994046, 0.5}, {0.0, 1.0}, {0.0, 2.0}}};
  double tol = 1e-5;
  int max_sweeps = 30;
  /// Varying positions in visiting order; empty means ascending.
  std::vector<Eigen::Index> sweep_order;
};

struct StepResult {
  double rho = 0.0;
  double alpha = 0.0;
  double loglik = 0.0;
  int evaluations = 0;
  bool collapsed = false;
};

/// Maximizes a restricted log-likelihood over one (rho, alpha) pair. Never
/// returns a point worse than the incoming one.
StepResult optimize_coordinate(const std::function<double(double rho, double alpha)>& loglik,
                               double rho_in, double alpha_in, const SequentialOptions& options);

/// One coordinate step through the fast path.
StepResult optimize_k(const PerKCache& cache, const CompressedMoments& moments,
                      const ShrinkageParams& params, Eigen::Index target,
                      const SequentialOptions& options = {});

struct FitTrace {
  std::vector<double> sweep_loglik;  // [0] is the initial value
  std::vector<double> step_loglik;
  std::vector<int> evaluations;      // per varying position, cumulative
  std::vector<Eigen::Index> collapsed;
  int fallback_steps = 0;            // steps that used the compressed form
  int sweeps = 0;
  bool converged = false;
  std::string reason;
};

struct SequentialFit {
  ShrinkageParams params;
  LikelihoodResult result;
  FitTrace trace;
};

SequentialFit fit_sequential(const CompressedMoments& moments, const ShrinkageParams& init,
                             const SequentialOptions& options = {});

}  // namespace msvc
