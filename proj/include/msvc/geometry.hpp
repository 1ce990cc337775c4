#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace msvc {

/// Planar sample sites, one row per site.
class CoordinateSet {
 public:
  CoordinateSet() = default;
  /// Throws NonFiniteInput on NaN/inf and InvalidArgument when empty.
  explicit CoordinateSet(Eigen::MatrixX2d points);

  Eigen::Index size() const noexcept { return points_.rows(); }
  const Eigen::MatrixX2d& points() const noexcept { return points_; }
  double x(Eigen::Index i) const { return points_(i, 0); }
  double y(Eigen::Index i) const { return points_(i, 1); }

  /// Rows selected by index, in the given order.
  CoordinateSet subset(const std::vector<Eigen::Index>& rows) const;

  friend bool operator==(const CoordinateSet& a, const CoordinateSet& b) {
    return a.points_.rows() == b.points_.rows() && a.points_ == b.points_;
  }

 private:
  Eigen::MatrixX2d points_;
};

inline double distance(const CoordinateSet& a, Eigen::Index i, const CoordinateSet& b,
                       Eigen::Index j) {
  const double dx = a.x(i) - b.x(j);
  const double dy = a.y(i) - b.y(j);
  return std::sqrt(dx * dx + dy * dy);
}

Eigen::MatrixXd pairwise_distances(const CoordinateSet& a, const CoordinateSet& b);

struct MstOptions {
  /// When nonzero and N exceeds it, the tree is built over a uniform random
  /// subsample of this many sites.
  Eigen::Index subsample_above = 0;
  std::uint64_t seed = 0;
};

/// Longest edge of the Euclidean minimum spanning tree (dense Prim).
double mst_max_edge(const CoordinateSet& coords, const MstOptions& options = {});

struct KnotSet {
  CoordinateSet centers;
  /// assignment[i] = index of the center nearest to site i.
  std::vector<Eigen::Index> assignment;
  /// Within-cluster sum of squares after each Lloyd update.
  std::vector<double> wcss_history;
  int iterations = 0;
  bool converged = false;

  Eigen::Index size() const noexcept { return centers.size(); }
};

struct KMeansOptions {
  int max_iterations = 100;
};

/// k-means++ seeded Lloyd iterations. Deterministic for a fixed seed.
KnotSet kmeans_knots(const CoordinateSet& coords, Eigen::Index knot_count, std::uint64_t seed,
                     const KMeansOptions& options = {});

enum class DiagonalPolicy { zero, kernel };

/// exp(-d/r) elementwise. With DiagonalPolicy::zero and a == b the diagonal
/// is set to exactly 0.
Eigen::MatrixXd proximity(const CoordinateSet& a, const CoordinateSet& b, double r,
                          DiagonalPolicy policy);

}  // namespace msvc
