#pragma once

#include "msvc/compression.hpp"
#include "msvc/eigenbasis.hpp"
#include "msvc/geometry.hpp"
#include "msvc/likelihood.hpp"
#include "msvc/sequential.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace msvc {

/// Sites, response and covariates. X.col(0) is the intercept.
struct SpatialDataset {
  CoordinateSet coords;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<bool> svc;            // empty means every coefficient varies
  std::vector<std::string> names;   // optional covariate names, K entries

  Eigen::Index size() const noexcept { return y.size(); }
  void validate() const;
};

enum class BasisChoice { exact, nystrom, automatic };

struct FitOptions {
  BasisChoice basis = BasisChoice::automatic;
  /// Exact basis when N <= this under the automatic choice.
  Eigen::Index auto_exact_max = 1000;
  /// 0 means min(200, N).
  Eigen::Index knot_count = 0;
  std::uint64_t seed = 0;
  /// Kernel range override; 0 means the longest minimum spanning tree edge.
  double range = 0.0;
  MstOptions mst;
  BasisOptions basis_options;
  SequentialOptions sequential;
  double init_rho = 0.5;
  double init_alpha = 1.0;
};

struct StageTimes {
  double basis_s = 0.0;     // range, knots and eigenbasis
  double compress_s = 0.0;
  double estimate_s = 0.0;  // sequential estimation and reconstruction
  double total() const noexcept { return basis_s + compress_s + estimate_s; }
};

struct SvcFit {
  Eigen::VectorXd b_hat;
  std::vector<Eigen::VectorXd> u_hat;   // per varying coefficient
  std::vector<Eigen::Index> varying;    // covariate index of each varying position
  ShrinkageParams params;
  double sigma2_hat = 0.0;
  double d_theta = 0.0;
  double loglik = 0.0;
  Eigen::Index n = 0;
  EigenBasis basis;
  Eigen::MatrixXd beta;                 // N x K surfaces
  FitTrace trace;
  StageTimes times;
};

SvcFit fit(const SpatialDataset& data, const FitOptions& options = {});

/// Estimation stages only, for a basis that is already available.
SvcFit fit_with_basis(const SpatialDataset& data, const EigenBasis& basis, const FitOptions& options = {});

/// beta_k = b_k + E diag(v_k) u_k for varying k, b_k otherwise.
Eigen::MatrixXd reconstruct_svc(const Eigen::MatrixXd& E, const Eigen::VectorXd& lambda,
                                const Eigen::VectorXd& b_hat, const std::vector<Eigen::Index>& varying,
                                const ShrinkageParams& params, const std::vector<Eigen::VectorXd>& u_hat);

double residual_variance(const SvcFit& fit);

/// Builds the basis the options ask for (range, knots, exact or Nystrom).
EigenBasis build_basis(const CoordinateSet& coords, const FitOptions& options);

}  // namespace msvc
