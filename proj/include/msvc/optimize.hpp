#pragma once

#include <Eigen/Dense>

#include <functional>

namespace msvc {

struct NelderMeadOptions {
  int max_evaluations = 200;
  double initial_step = 0.5;
  /// Stop once the simplex value spread and the simplex diameter both fall
  /// below these.
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-7;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free minimization. Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

}  // namespace msvc
