#include "msvc/gwr.hpp"

#include "msvc/error.hpp"
#include "msvc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msvc {

namespace {

void check(const SpatialDataset& data, double bandwidth, const GwrOptions& options) {
  data.validate();
  if (data.size() > options.size_guard)
    throw Error(ErrorCode::SizeGuardExceeded, "GWR limited to N <= " + std::to_string(options.size_guard));
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive and finite");
}

// Visits every site with its local coefficient vector.
template <typename Visit>
void local_fits(const SpatialDataset& data, double bandwidth, bool leave_one_out, const GwrOptions& options,
                Visit&& visit) {
  const Eigen::Index n = data.size();
  const Eigen::MatrixX2d& p = data.coords.points();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w = (-((p.rowwise() - p.row(i)).rowwise().norm()) / bandwidth).array().exp().matrix();
    if (leave_one_out) w(i) = 0.0;
    const Eigen::MatrixXd wx = data.X.array().colwise() * w.array();
    const Eigen::MatrixXd a = wx.transpose() * data.X;
    const Eigen::VectorXd rhs = wx.transpose() * data.y;
    Eigen::VectorXd beta;
    try {
      beta = SpdFactor(a, ErrorCode::LocalSingularity, options.max_condition).solve(rhs);
    } catch (const Error&) {
      throw Error(ErrorCode::LocalSingularity, "local normal matrix singular at site " + std::to_string(i));
    }
    visit(i, beta);
  }
}

double extent(const CoordinateSet& coords) {
  const Eigen::MatrixX2d& p = coords.points();
  return (p.colwise().maxCoeff() - p.colwise().minCoeff()).norm();
}

}  // namespace

Eigen::MatrixXd gwr_fit_at(const SpatialDataset& data, double bandwidth, bool leave_one_out,
                           const GwrOptions& options) {
  check(data, bandwidth, options);
  Eigen::MatrixXd beta(data.size(), data.X.cols());
  local_fits(data, bandwidth, leave_one_out, options,
             [&](Eigen::Index i, const Eigen::VectorXd& b) { beta.row(i) = b.transpose(); });
  return beta;
}

double gwr_cv_score(const SpatialDataset& data, double bandwidth, const GwrOptions& options) {
  check(data, bandwidth, options);
  double score = 0.0;
  local_fits(data, bandwidth, true, options, [&](Eigen::Index i, const Eigen::VectorXd& b) {
    const double e = data.y(i) - data.X.row(i).dot(b);
    score += e * e;
  });
  return score;
}

GwrFit gwr_select_bandwidth(const SpatialDataset& data, const BandwidthGrid& grid, const GwrOptions& options) {
  data.validate();
  const double ext = extent(data.coords);
  if (!(ext > 0.0)) throw Error(ErrorCode::AllPointsCoincident, "all sites coincide");
  const double lower = grid.lower > 0.0 ? grid.lower : ext * 1e-3;
  const double upper = grid.upper > 0.0 ? grid.upper : ext * 10.0;
  if (!(upper > lower) || grid.points < 2)
    throw Error(ErrorCode::InvalidArgument, "bandwidth grid needs 0 < lower < upper and at least 2 points");

  GwrFit out;
  const double lo = std::log(lower);
  const double hi = std::log(upper);
  auto score_at = [&](double log_b) {
    try {
      return gwr_cv_score(data, std::exp(log_b), options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LocalSingularity) throw;
      return std::numeric_limits<double>::infinity();
    }
  };

  double best_log = lo;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (int i = 0; i < grid.points; ++i) {
    const double t = lo + (hi - lo) * i / (grid.points - 1);
    const double s = score_at(t);
    logs.push_back(t);
    out.grid_bandwidths.push_back(std::exp(t));
    out.grid_scores.push_back(s);
    if (s < best) {
      best = s;
      best_log = t;
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::NoValidBandwidth, "every candidate bandwidth was singular");

  const auto idx = static_cast<std::size_t>(std::find(logs.begin(), logs.end(), best_log) - logs.begin());
  double a = logs[idx == 0 ? 0 : idx - 1];
  double b = logs[std::min(idx + 1, logs.size() - 1)];
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = score_at(c);
  double fd = score_at(d);
  for (int it = 0; it < grid.refine_iterations; ++it) {
    if (fc < best) { best = fc; best_log = c; }
    if (fd < best) { best = fd; best_log = d; }
    if (fc <= fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a);
      fc = score_at(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a);
      fd = score_at(d);
    }
  }
  if (fc < best) { best = fc; best_log = c; }
  if (fd < best) { best = fd; best_log = d; }

  out.bandwidth = std::exp(best_log);
  out.cv_score = best;
  return out;
}

GwrFit gwr_fit(const SpatialDataset& data, const BandwidthGrid& grid, const GwrOptions& options) {
  GwrFit out = gwr_select_bandwidth(data, grid, options);
  out.beta = gwr_fit_at(data, out.bandwidth, false, options);
  return out;
}

}  // namespace msvc
