#pragma once

#include "msvc/compression.hpp"

#include <Eigen/Dense>

#include <vector>

namespace msvc {

/// Per varying coefficient: rho = tau / sigma and the eigenvalue exponent
/// alpha. rho == 0 marks a coefficient collapsed to a constant.
struct ShrinkageParams {
  std::vector<double> rho;
  std::vector<double> alpha;

  static ShrinkageParams uniform(Eigen::Index kv, double rho, double alpha) {
    return {std::vector<double>(static_cast<std::size_t>(kv), rho),
            std::vector<double>(static_cast<std::size_t>(kv), alpha)};
  }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(rho.size()); }
  bool collapsed(Eigen::Index j) const { return rho[static_cast<std::size_t>(j)] == 0.0; }
};

struct LikelihoodResult {
  double loglik = 0.0;
  Eigen::VectorXd b_hat;
  std::vector<Eigen::VectorXd> u_hat;  // one per varying coefficient
  double d_theta = 0.0;
  double sigma2_hat = 0.0;
  double residual_ss = 0.0;  // ||eps_hat||^2
  double logdet_p = 0.0;
};

/// rho * lambda^(alpha / 2), elementwise.
Eigen::VectorXd v_diag(double rho, double alpha, const Eigen::VectorXd& lambda);

struct DirectOptions {
  Eigen::Index size_guard = 5000;
};

/// Restricted log-likelihood built from the full N-row design.
LikelihoodResult direct_restricted_loglik(const SvcDesign& design, const ShrinkageParams& params,
                                          const DirectOptions& options = {});

/// Same quantity from the compressed moments only.
LikelihoodResult compressed_restricted_loglik(const CompressedMoments& moments,
                                              const ShrinkageParams& params);

/// Assembles the restricted log-likelihood from its pieces. Throws PerfectFit
/// when d_theta is negligible relative to y'y and InsufficientData when N <= K.
double restricted_loglik_value(double logdet_p, double d_theta, Eigen::Index n, Eigen::Index k,
                               double myy);

}  // namespace msvc
