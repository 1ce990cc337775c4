#pragma once

#include "msvc/compression.hpp"
#include "msvc/eigenbasis.hpp"
#include "msvc/geometry.hpp"
#include "msvc/likelihood.hpp"
#include "msvc/model.hpp"
#include "msvc/sequential.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testing {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(gen); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen); }
  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
};

inline msvc::CoordinateSet random_coords(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::MatrixX2d p(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) << scale * rng.uniform(), scale * rng.uniform();
  return msvc::CoordinateSet(p);
}

// Small design on an exact basis truncated to l columns; every coefficient varies unless told otherwise.
struct Instance {
  msvc::CoordinateSet coords;
  msvc::EigenBasis basis;
  msvc::SvcDesign design;
  msvc::ShrinkageParams params;
};

inline Instance random_instance(Rng& rng, Eigen::Index n, Eigen::Index k, Eigen::Index l,
                                std::vector<bool> svc = {}) {
  Instance inst;
  inst.coords = random_coords(rng, n);
  msvc::BasisOptions opts;
  opts.max_rank = l;
  inst.basis = msvc::exact_basis(inst.coords, msvc::mst_max_edge(inst.coords), opts);
  auto& d = inst.design;
  d.X.resize(n, k);
  d.X.col(0).setOnes();
  for (Eigen::Index j = 1; j < k; ++j) d.X.col(j) = rng.normals(n);
  d.svc = svc.empty() ? std::vector<bool>(static_cast<std::size_t>(k), true) : svc;
  d.E = inst.basis.E;
  d.lambda = inst.basis.lambda;
  Eigen::VectorXd y = rng.normals(n);
  for (Eigen::Index j = 0; j < k; ++j)
    y += d.X.col(j).cwiseProduct(Eigen::VectorXd::Constant(n, 1.0) + 0.5 * d.E * rng.normals(d.E.cols()));
  d.y = y;
  const auto kv = static_cast<std::size_t>(d.varying().size());
  for (std::size_t j = 0; j < kv; ++j) {
    inst.params.rho.push_back(std::exp(rng.uniform(std::log(0.05), std::log(3.0))));
    inst.params.alpha.push_back(rng.uniform(0.0, 3.0));
  }
  return inst;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean();
  const Eigen::ArrayXd y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Naive restricted log-likelihood: builds the full mixed-model design and inverts P densely.
struct NaiveReml {
  double loglik;
  Eigen::VectorXd coef;  // [b; u_1; ...]
  double d;
  double logdet;
};

inline NaiveReml naive_reml(const msvc::SvcDesign& d, const msvc::ShrinkageParams& p) {
  const Eigen::Index n = d.X.rows(), k = d.X.cols(), l = d.E.cols();
  const auto varying = d.varying();
  const auto kv = static_cast<Eigen::Index>(varying.size());
  Eigen::MatrixXd z(n, k + kv * l);
  z.leftCols(k) = d.X;
  for (Eigen::Index j = 0; j < kv; ++j)
    for (Eigen::Index c = 0; c < l; ++c)
      for (Eigen::Index i = 0; i < n; ++i)
        z(i, k + j * l + c) = d.X(i, varying[static_cast<std::size_t>(j)]) * d.E(i, c) *
                              p.rho[static_cast<std::size_t>(j)] *
                              std::pow(d.lambda(c), p.alpha[static_cast<std::size_t>(j)] / 2.0);
  Eigen::MatrixXd pm = z.transpose() * z;
  for (Eigen::Index i = k; i < pm.rows(); ++i) pm(i, i) += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(pm);
  const Eigen::MatrixXd pinv = lu.inverse();
  NaiveReml r;
  r.coef = pinv * (z.transpose() * d.y);
  const Eigen::VectorXd e = d.y - z * r.coef;
  r.d = e.squaredNorm() + r.coef.tail(kv * l).squaredNorm();
  r.logdet = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
  const double dof = static_cast<double>(n - k);
  r.loglik = -0.5 * r.logdet - 0.5 * dof * (1.0 + std::log(2.0 * M_PI * r.d / dof));
  return r;
}

// Dense P of the compressed form and its right-hand side.
struct DenseP {
  Eigen::MatrixXd p;
  Eigen::VectorXd rhs;
};

inline DenseP dense_p(const msvc::CompressedMoments& m, const msvc::ShrinkageParams& params) {
  const Eigen::Index k = m.k(), l = m.l();
  Eigen::VectorXd s(k + m.kv() * l);
  s.head(k).setOnes();
  for (Eigen::Index j = 0; j < m.kv(); ++j)
    s.segment(k + j * l, l) = msvc::v_diag(params.rho[static_cast<std::size_t>(j)], params.alpha[static_cast<std::size_t>(j)], m.lambda());
  DenseP d;
  d.p = s.asDiagonal() * m.gram() * s.asDiagonal();
  d.p.diagonal().tail(m.kv() * l).array() += 1.0;
  d.rhs = s.cwiseProduct(m.cross());
  return d;
}

// Cache order [b; u_others; u_target] mapped back to the natural order.
inline Eigen::VectorXd natural_order(const msvc::PerKCache& c, const Eigen::VectorXd& sol, Eigen::Index kv) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.k + kv * c.l);
  out.head(c.k) = sol.head(c.k);
  for (std::size_t i = 0; i < c.others.size(); ++i)
    out.segment(c.k + c.others[i] * c.l, c.l) = sol.segment(c.k + static_cast<Eigen::Index>(i) * c.l, c.l);
  out.segment(c.k + c.target * c.l, c.l) = sol.tail(c.l);
  return out;
}

}  // namespace testing
