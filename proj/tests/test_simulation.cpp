#include "helpers.hpp"

#include "msvc/error.hpp"
#include "msvc/simulation.hpp"

#include <doctest.h>

using namespace msvc;
using testing::Rng;

TEST_CASE("small generator: intercept convention, reproducibility and noise rule") {
  SimConfig c;
  c.n = 300;
  c.k = 3;
  c.seed = 5;
  const SimInstance a = gen_small(c);
  const SimInstance b = gen_small(c);
  CHECK(a.dataset.y == b.dataset.y);
  CHECK(a.true_beta == b.true_beta);
  CHECK(a.dataset.coords == b.dataset.coords);
  CHECK((a.dataset.X.col(0).array() == 1.0).all());
  const Eigen::VectorXd signal = (a.dataset.X.array() * a.true_beta.array()).rowwise().sum();
  const double var = (signal.array() - signal.mean()).square().mean();
  CHECK(a.true_sigma2 == doctest::Approx(0.3 * var).epsilon(1e-14));
}

TEST_CASE("small generator: coefficient means are one and R^2 is near 1/1.3") {
  std::vector<double> r2;
  for (int seed = 0; seed < 20; ++seed) {
    SimConfig c;
    c.n = 1000;
    c.k = 2;
    c.seed = static_cast<std::uint64_t>(seed);
    const SimInstance s = gen_small(c);
    r2.push_back(realized_r2(s));
    // beta = 1 + W e with unit white noise e, so mean(beta) - 1 = (W'1)'e / N
    // has standard error |W'1| / N.
    Eigen::MatrixXd w = proximity(s.dataset.coords, s.dataset.coords, 1.0, DiagonalPolicy::kernel);
    w.array().colwise() /= w.rowwise().sum().array();
    const double se = (w.transpose() * Eigen::VectorXd::Ones(1000)).norm() / 1000.0;
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(s.true_beta.col(j).mean() - 1.0) < 3.0 * se);
  }
  for (double v : r2) CHECK(std::abs(v - 1.0 / 1.3) < 0.05);
}

TEST_CASE("small generator: row standardized moving average weights") {
  // Rebuild the smoother and confirm it averages to exactly one per row.
  Rng rng(1);
  const auto c = testing::random_coords(rng, 50);
  Eigen::MatrixXd m = proximity(c, c, 1.0, DiagonalPolicy::kernel);
  m.array().colwise() /= m.rowwise().sum().array();
  CHECK(testing::max_abs(m.rowwise().sum() - Eigen::VectorXd::Ones(50)) < 1e-12);
  SimConfig cfg;
  cfg.n = 6000;
  try {
    gen_small(cfg);
    FAIL("expected SizeGuardExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeGuardExceeded);
  }
}

TEST_CASE("large generator: alphas, rank bound and reproducibility") {
  SimConfig c;
  c.n = 500;
  c.k = 3;
  c.seed = 2;
  c.generator = Generator::large;
  const SimInstance a = gen_large(c);
  const SimInstance b = gen_large(c);
  CHECK(a.dataset.y == b.dataset.y);
  CHECK(a.true_beta == b.true_beta);
  CHECK(a.alphas == std::vector<double>{2.0, 2.0, 0.5});
  CHECK(a.generator_rank <= 2000);
  CHECK(a.generator_rank > 0);
  CHECK((a.dataset.X.col(0).array() == 1.0).all());
  CHECK(default_alphas(4) == std::vector<double>{2.0, 2.0, 0.5, 0.5});
  c.knot_count = 2001;
  CHECK_THROWS_AS(gen_large(c), Error);
}

TEST_CASE("large generator: alpha 2 surfaces are smoother than alpha 0.5 surfaces") {
  int ordered = 0;
  for (int seed = 0; seed < 20; ++seed) {
    SimConfig c;
    c.n = 2000;
    c.k = 2;
    c.seed = 40 + static_cast<std::uint64_t>(seed);
    c.generator = Generator::large;
    c.knot_count = 500;
    const SimInstance s = gen_large(c);
    const double r = mst_max_edge(s.dataset.coords);
    const Eigen::MatrixXd cm = proximity(s.dataset.coords, s.dataset.coords, r, DiagonalPolicy::zero);
    ordered += moran_coefficient(s.true_beta.col(0), cm) > moran_coefficient(s.true_beta.col(1), cm) ? 1 : 0;
  }
  CHECK(ordered >= 18);
}

TEST_CASE("metrics: identity, shift and scalar oracle") {
  Rng rng(3);
  Eigen::MatrixXd t(20, 3);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  CHECK(rmse(t, t) == 0.0);
  CHECK(bias(t, t) == 0.0);
  CHECK(corr(t, t) == doctest::Approx(1.0).epsilon(1e-15));
  const Eigen::MatrixXd shifted = t.array() + 0.7;
  CHECK(rmse(t, shifted) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(bias(t, shifted) == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(corr(t, shifted) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd e(20, 3);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = rng.normal();
  double sq = 0.0, diff = 0.0, st = 0.0, se = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      sq += (t(i, j) - e(i, j)) * (t(i, j) - e(i, j));
      diff += t(i, j) - e(i, j);
      st += t(i, j);
      se += e(i, j);
    }
  CHECK(rmse(t, e) == doctest::Approx(std::sqrt(sq / 60.0)).epsilon(1e-14));
  CHECK(bias(t, e) == doctest::Approx(diff / 60.0).epsilon(1e-12));
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double a = t(i, j) - st / 60.0, b = e(i, j) - se / 60.0;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
  CHECK(corr(t, e) == doctest::Approx(sab / std::sqrt(saa * sbb)).epsilon(1e-12));
  try {
    rmse(t, e.leftCols(2));
    FAIL("expected ShapeMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("bias of an unbiased noisy estimator shrinks with replications") {
  Rng rng(4);
  const Eigen::Index n = 200, reps = 50;
  Eigen::MatrixXd t(n, reps), e(n, reps);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t.data()[i] = rng.normal();
    e.data()[i] = t.data()[i] + 0.5 * rng.normal();
  }
  CHECK(std::abs(bias(t, e)) < 3.0 * rmse(t, e) / std::sqrt(static_cast<double>(n * reps)));
}

TEST_CASE("experiment runner: row layout, ordering and empty method list") {
  ExperimentSpec spec;
  spec.methods = {"msvc", "gwr"};
  spec.sizes = {150, 200};
  spec.k = 2;
  spec.reps = 2;
  spec.generator_knots = 100;
  const auto rows = run_experiment(spec);
  CHECK(rows.size() == 2u * 2u * 2u * 2u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    CHECK(std::tie(a.method, a.n, a.rep, a.alpha_group) < std::tie(b.method, b.n, b.rep, b.alpha_group));
  }
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(std::isfinite(r.rmse));
    CHECK(r.t_total_s >= r.t_estimate_s);
  }
  spec.threads = 3;
  const auto threaded = run_experiment(spec);
  REQUIRE(threaded.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(threaded[i].rmse == rows[i].rmse);
  spec.methods.clear();
  CHECK(run_experiment(spec).empty());
  spec.methods = {"svm"};
  CHECK_THROWS_AS(run_experiment(spec), Error);
}
