#include "helpers.hpp"

#include "msvc/compression.hpp"
#include "msvc/error.hpp"

#include <doctest.h>

using namespace msvc;
using testing::Rng;

namespace {

double naive_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += a(i) * b(i);
  return s;
}

}  // namespace

TEST_CASE("compressed blocks equal naive inner products") {
  Rng rng(1);
  auto inst = testing::random_instance(rng, 40, 3, 10);
  const auto& d = inst.design;
  const CompressedMoments m = compress(d, 7);
  REQUIRE(m.kv() == 3);
  const double tol = 1e-12;
  for (Eigen::Index a = 0; a < 3; ++a) {
    for (Eigen::Index b = 0; b < 3; ++b)
      CHECK(std::abs(m.m00()(a, b) - naive_dot(d.X.col(a), d.X.col(b))) < tol);
    CHECK(std::abs(m.m0()(a) - naive_dot(d.X.col(a), d.y)) < tol);
  }
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Eigen::MatrixXd xe = d.E.array().colwise() * d.X.col(j).array();
    for (Eigen::Index l = 0; l < 10; ++l) {
      CHECK(std::abs(m.mk(j)(l) - naive_dot(xe.col(l), d.y)) < tol);
      for (Eigen::Index a = 0; a < 3; ++a) CHECK(std::abs(m.m0k(j)(a, l) - naive_dot(d.X.col(a), xe.col(l))) < tol);
    }
    for (Eigen::Index i = 0; i < 3; ++i) {
      const Eigen::MatrixXd xi = d.E.array().colwise() * d.X.col(i).array();
      const Eigen::MatrixXd block = m.mkk(i, j);
      for (Eigen::Index p = 0; p < 10; ++p)
        for (Eigen::Index q = 0; q < 10; ++q) CHECK(std::abs(block(p, q) - naive_dot(xi.col(p), xe.col(q))) < tol);
    }
  }
  CHECK(std::abs(m.myy() - naive_dot(d.y, d.y)) < tol);
  CHECK(m.n() == 40);
}

TEST_CASE("block symmetry, storage bound and positivity") {
  Rng rng(2);
  auto inst = testing::random_instance(rng, 60, 4, 12);
  const CompressedMoments m = compress(inst.design);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(testing::max_abs(m.mkk(i, i) - m.mkk(i, i).transpose()) < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.mkk(i, i)).eigenvalues().minCoeff() > -1e-10);
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(m.mkk(i, j) == m.mkk(j, i).transpose());
  }
  const Eigen::Index k = 4, l = 12;
  CHECK(m.stored_scalars() <= k * k * (l + 1) * (l + 1) + k + 1);
  CHECK(m.myy() >= 0.0);
}

TEST_CASE("zero response gives zero moments and leaves the blocks unchanged") {
  Rng rng(3);
  auto inst = testing::random_instance(rng, 30, 2, 6);
  const CompressedMoments a = compress(inst.design);
  inst.design.y.setZero();
  const CompressedMoments b = compress(inst.design);
  CHECK(b.m0().isZero(0.0));
  CHECK(b.mk(0).isZero(0.0));
  CHECK(b.mk(1).isZero(0.0));
  CHECK(b.myy() == 0.0);
  CHECK(a.gram() == b.gram());
}

TEST_CASE("intercept-only design: cross block is the zero column sums of E") {
  Rng rng(4);
  auto inst = testing::random_instance(rng, 50, 1, 8);
  const CompressedMoments m = compress(inst.design);
  CHECK(testing::max_abs(m.m0k(0)) < 1e-12);
}

TEST_CASE("non-varying coefficients are omitted") {
  Rng rng(5);
  auto inst = testing::random_instance(rng, 45, 3, 6, {true, false, true});
  const CompressedMoments m = compress(inst.design);
  CHECK(m.kv() == 2);
  CHECK(m.varying() == std::vector<Eigen::Index>{0, 2});
  CHECK(m.gram().rows() == 3 + 2 * 6);
}

TEST_CASE("compression is invariant to a consistent row permutation and to chunking") {
  Rng rng(6);
  auto inst = testing::random_instance(rng, 70, 3, 9);
  const CompressedMoments a = compress(inst.design, 4096);
  const CompressedMoments c = compress(inst.design, 5);
  CHECK(testing::max_abs(a.gram() - c.gram()) < 1e-11);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(70);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 70, rng.gen);
  SvcDesign d = inst.design;
  d.X = perm * d.X;
  d.E = perm * d.E;
  d.y = perm * d.y;
  const CompressedMoments b = compress(d);
  CHECK(testing::max_abs(a.gram() - b.gram()) < 1e-11);
  CHECK(testing::max_abs(a.cross() - b.cross()) < 1e-11);
  CHECK(std::abs(a.myy() - b.myy()) < 1e-11);
}

TEST_CASE("compression validates the design") {
  Rng rng(7);
  auto inst = testing::random_instance(rng, 30, 2, 5);
  SvcDesign bad = inst.design;
  bad.y.conservativeResize(29);
  CHECK_THROWS_AS(compress(bad), Error);
  bad = inst.design;
  bad.E(3, 2) = std::numeric_limits<double>::infinity();
  try {
    compress(bad);
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteInput);
  }
  bad = inst.design;
  bad.svc = {true};
  try {
    compress(bad);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
