#pragma once

#include "msvc/gwr.hpp"
#include "msvc/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace msvc {

enum class Generator { small, large };

struct SimConfig {
  Eigen::Index n = 1000;
  Eigen::Index k = 2;
  std::uint64_t seed = 0;
  Generator generator = Generator::small;
  /// Noise variance as a share of the realized signal variance.
  double noise_ratio = 0.3;

  // small: row-standardized exp(-d) moving average
  bool zero_diagonal = false;
  Eigen::Index small_size_guard = 5000;

  // large: Nystrom eigenvectors with knot_count knots (0 means min(2000, N))
  Eigen::Index knot_count = 0;
  /// Per-coefficient scale exponents; empty means ceil(K/2) at 2 then 0.5.
  std::vector<double> alphas;
};

struct SimInstance {
  SpatialDataset dataset;
  Eigen::MatrixXd true_beta;   // N x K
  double true_sigma2 = 0.0;
  std::vector<double> alphas;  // large generator only
  Eigen::Index generator_rank = 0;
};

std::vector<double> default_alphas(Eigen::Index k);

SimInstance gen_small(const SimConfig& config);
SimInstance gen_large(const SimConfig& config);
SimInstance generate(const SimConfig& config);

/// Sample R^2 of the true model: 1 - SS(noise) / SS(y), both centered.
double realized_r2(const SimInstance& instance);

/// Columns are replications; sites along rows.
double rmse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
/// Mean of truth - estimate.
double bias(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
/// Pearson correlation pooled over all entries.
double corr(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

struct ExperimentSpec {
  std::vector<std::string> methods = {"msvc"};  // msvc, gwr
  std::vector<Eigen::Index> sizes = {1000};
  Eigen::Index k = 2;
  int reps = 20;
  std::uint64_t seed = 1;
  Generator generator = Generator::large;
  Eigen::Index generator_knots = 0;
  FitOptions fit;
  BandwidthGrid gwr_grid;
  int threads = 1;
};

struct ReportRow {
  std::string method;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  int rep = 0;
  std::string alpha_group;
  double rmse = 0.0;
  double bias = 0.0;
  double corr = 0.0;
  double t_basis_s = 0.0;
  double t_compress_s = 0.0;
  double t_estimate_s = 0.0;
  double t_total_s = 0.0;
  std::string error;  // empty on success
};

/// Seed of replication `rep` at size index `size_index`.
std::uint64_t replication_seed(std::uint64_t base, std::size_t size_index, int rep);

/// Rows sorted by (method, N, rep, alpha_group). Failed replications keep
/// their rows with NaN metrics and the error text.
std::vector<ReportRow> run_experiment(const ExperimentSpec& spec);

}  // namespace msvc
