#include "msvc/geometry.hpp"

#include "msvc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace msvc {

CoordinateSet::CoordinateSet(Eigen::MatrixX2d points) : points_(std::move(points)) {
  if (points_.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty coordinate set");
  if (!points_.allFinite()) throw Error(ErrorCode::NonFiniteInput, "non-finite coordinate");
}

CoordinateSet CoordinateSet::subset(const std::vector<Eigen::Index>& rows) const {
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points_.row(rows[i]);
  return CoordinateSet(std::move(out));
}

Eigen::MatrixXd pairwise_distances(const CoordinateSet& a, const CoordinateSet& b) {
  Eigen::MatrixXd d(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j)
    for (Eigen::Index i = 0; i < a.size(); ++i) d(i, j) = distance(a, i, b, j);
  return d;
}

double mst_max_edge(const CoordinateSet& coords, const MstOptions& options) {
  const Eigen::Index n_all = coords.size();
  if (n_all < 2) throw Error(ErrorCode::InvalidArgument, "minimum spanning tree needs at least 2 sites");

  const CoordinateSet* pts = &coords;
  CoordinateSet sampled;
  if (options.subsample_above > 1 && n_all > options.subsample_above) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_all));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(options.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(options.subsample_above));
    std::sort(idx.begin(), idx.end());
    sampled = coords.subset(idx);
    pts = &sampled;
  }

  const Eigen::Index n = pts->size();
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  Eigen::Index current = 0;
  in_tree[0] = 1;
  double max_edge = 0.0;
  for (Eigen::Index added = 1; added < n; ++added) {
    Eigen::Index next = -1;
    double next_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distance(*pts, current, *pts, j);
      if (d < best[j]) best[j] = d;
      if (best[j] < next_d) {
        next_d = best[j];
        next = j;
      }
    }
    in_tree[next] = 1;
    max_edge = std::max(max_edge, next_d);
    current = next;
  }
  if (max_edge <= 0.0)
    throw Error(ErrorCode::AllPointsCoincident, "all sample sites coincide; kernel range would be 0");
  return max_edge;
}

namespace {

double squared_distance(const CoordinateSet& a, Eigen::Index i, const Eigen::MatrixX2d& c,
                        Eigen::Index j) {
  const double dx = a.x(i) - c(j, 0);
  const double dy = a.y(i) - c(j, 1);
  return dx * dx + dy * dy;
}

}  // namespace

KnotSet kmeans_knots(const CoordinateSet& coords, Eigen::Index knot_count, std::uint64_t seed,
                     const KMeansOptions& options) {
  const Eigen::Index n = coords.size();
  if (knot_count < 1 || knot_count > n)
    throw Error(ErrorCode::InvalidKnotCount,
                "knot count " + std::to_string(knot_count) + " outside [1, " + std::to_string(n) + "]");

  std::mt19937_64 rng(seed);
  Eigen::MatrixX2d centers(knot_count, 2);

  // k-means++ seeding
  std::vector<double> min_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  for (Eigen::Index c = 0; c < knot_count; ++c) {
    centers.row(c) = coords.points().row(pick);
    chosen[pick] = 1;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], squared_distance(coords, i, centers, c));
      total += min_d2[i];
    }
    if (c + 1 == knot_count) break;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (min_d2[i] <= 0.0) continue;
        pick = i;
        target -= min_d2[i];
        if (target <= 0.0) break;
      }
    } else {
      // every remaining site duplicates a center
      pick = static_cast<Eigen::Index>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
    }
  }

  KnotSet out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(knot_count));

  auto update_centers = [&]() {
    Eigen::MatrixX2d sums = Eigen::MatrixX2d::Zero(knot_count, 2);
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.assignment[i]) += coords.points().row(i);
      ++counts[out.assignment[i]];
    }
    for (Eigen::Index c = 0; c < knot_count; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) wcss += squared_distance(coords, i, centers, out.assignment[i]);
    out.wcss_history.push_back(wcss);
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d2 = squared_distance(coords, i, centers, 0);
      for (Eigen::Index c = 1; c < knot_count; ++c) {
        const double dc = squared_distance(coords, i, centers, c);
        if (dc < best_d2) {
          best_d2 = dc;
          best = c;
        }
      }
      d2[i] = best_d2;
      if (out.assignment[i] != best) {
        out.assignment[i] = best;
        changed = true;
      }
    }
    out.iterations = iter + 1;
    if (!changed) {
      out.converged = true;
      break;
    }

    // empty clusters take the site farthest from its current center
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[out.assignment[i]];
    for (Eigen::Index c = 0; c < knot_count; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index far = -1;
      double far_d2 = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[out.assignment[i]] > 1 && d2[i] > far_d2) {
          far_d2 = d2[i];
          far = i;
        }
      }
      if (far < 0) continue;
      --counts[out.assignment[far]];
      out.assignment[far] = c;
      ++counts[c];
      d2[far] = 0.0;
    }
    update_centers();
  }

  out.centers = CoordinateSet(std::move(centers));
  return out;
}

Eigen::MatrixXd proximity(const CoordinateSet& a, const CoordinateSet& b, double r,
                          DiagonalPolicy policy) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonPositiveRange, "kernel range must be positive");
  Eigen::MatrixXd c(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j)
    for (Eigen::Index i = 0; i < a.size(); ++i) c(i, j) = std::exp(-distance(a, i, b, j) / r);
  if (policy == DiagonalPolicy::zero && (&a == &b || a == b)) c.diagonal().setZero();
  return c;
}

}  // namespace msvc
