#pragma once

#include "msvc/model.hpp"

#include <Eigen/Dense>

namespace msvc {

struct GwrOptions {
  Eigen::Index size_guard = 20000;
  double max_condition = 1e12;
};

/// Local weighted least squares at every site with weights exp(-d/bandwidth).
/// With leave_one_out the site's own weight is zero.
Eigen::MatrixXd gwr_fit_at(const SpatialDataset& data, double bandwidth, bool leave_one_out = false,
                           const GwrOptions& options = {});

/// Sum of squared leave-one-out prediction errors.
double gwr_cv_score(const SpatialDataset& data, double bandwidth, const GwrOptions& options = {});

/// Log-spaced bandwidth scan. Zero bounds mean extent * 1e-3 and extent * 10,
/// where extent is the diagonal of the coordinates' bounding box.
struct BandwidthGrid {
  double lower = 0.0;
  double upper = 0.0;
  int points = 20;
  int refine_iterations = 30;
};

struct GwrFit {
  double bandwidth = 0.0;
  double cv_score = 0.0;
  Eigen::MatrixXd beta;  // N x K
  std::vector<double> grid_bandwidths;
  std::vector<double> grid_scores;  // +inf where a local system was singular
};

/// Coarse grid scan followed by golden-section refinement in log bandwidth
/// around the best grid point. Returns the bandwidth only; beta is left empty.
GwrFit gwr_select_bandwidth(const SpatialDataset& data, const BandwidthGrid& grid = {},
                            const GwrOptions& options = {});

/// Bandwidth selection plus surfaces at the selected bandwidth.
GwrFit gwr_fit(const SpatialDataset& data, const BandwidthGrid& grid = {}, const GwrOptions& options = {});

}  // namespace msvc
