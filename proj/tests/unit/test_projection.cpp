#include <doctest.h>

#include "metasrl/error.hpp"
#include "metasrl/projection.hpp"
#include "oracles.hpp"

using namespace metasrl;

TEST_CASE("hand examples") {
  Vector v(2);
  v << 2.0, 0.0;
  Vector out = project_row_shrinkage_simplex(v, 0.0);
  CHECK(out(0) == doctest::Approx(1.0));
  CHECK(out(1) == doctest::Approx(0.0));
  v << 1.0, 0.0;
  out = project_row_shrinkage_simplex(v, 0.25);
  CHECK(out(0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(out(1) == doctest::Approx(0.25).epsilon(1e-15));
  Vector inside(3);
  inside << 0.2, 0.5, 0.3;
  CHECK((project_row_shrinkage_simplex(inside, 0.1) - inside).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("matches bisection oracle") {
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(6));
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-2.0, 2.0);
    const double rho = rng.uniform01() * 0.99 / static_cast<double>(n);
    const Vector p = project_row_shrinkage_simplex(v, rho);
    CHECK((p - oracle::projection_bisection(v, rho)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.minCoeff() >= rho - 1e-12);
    CHECK((project_row_shrinkage_simplex(p, rho) - p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("non-expansive on random pairs") {
  Rng rng(2);
  for (int k = 0; k < 10000; ++k) {
    Vector x(4);
    Vector y(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      x(i) = rng.uniform(-3.0, 3.0);
      y(i) = rng.uniform(-3.0, 3.0);
    }
    const double rho = 0.05;
    CHECK((project_row_shrinkage_simplex(x, rho) - project_row_shrinkage_simplex(y, rho)).norm() <=
          (x - y).norm() + 1e-12);
  }
}

TEST_CASE("table and box projections") {
  Matrix m(2, 3);
  m << 3, 0, 0, 0.1, 0.1, 0.1;
  const Matrix p = project_rows_shrinkage_simplex(m, 0.1);
  CHECK(in_shrinkage_simplex(p, 0.1));
  CHECK_FALSE(in_shrinkage_simplex(m, 0.1));
  Vector v(3);
  v << -1, 0.5, 4;
  const Vector b = project_box(v, 0.0, 1.0);
  CHECK(b(0) == 0.0);
  CHECK(b(1) == 0.5);
  CHECK(b(2) == 1.0);
}

TEST_CASE("invalid shrinkage") {
  CHECK_THROWS_AS(project_row_shrinkage_simplex(Vector::Ones(4), 0.25), InvalidInput);
  CHECK_THROWS_AS(project_row_shrinkage_simplex(Vector::Ones(4), -0.1), InvalidInput);
  CHECK_THROWS_AS(project_row_shrinkage_simplex(Vector(), 0.0), InvalidInput);
}
