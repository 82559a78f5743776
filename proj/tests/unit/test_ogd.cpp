#include <doctest.h>

#include <cmath>

#include "metasrl/error.hpp"
#include "metasrl/ogd.hpp"
#include "metasrl/projection.hpp"
#include "oracles.hpp"

using namespace metasrl;

TEST_CASE("single step examples") {
  Matrix x(1, 2);
  x << 0.5, 0.5;
  const Projector simplex = shrinkage_simplex_projector(0.0);
  CHECK(inexact_ogd_step(x, Matrix::Zero(1, 2), 0.3, simplex) == x);
  Matrix g(1, 2);
  g << 1.0, -1.0;
  const Matrix y = inexact_ogd_step(x, g, 0.1, simplex);
  CHECK(y(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(y(0, 1) == doctest::Approx(0.6).epsilon(1e-15));
  const Matrix far = inexact_ogd_step(x, g, 10.0, shrinkage_simplex_projector(0.1));
  CHECK(in_shrinkage_simplex(far, 0.1));
  CHECK_THROWS_AS(inexact_ogd_step(x, g, 0.0, simplex), InvalidInput);
  CHECK_THROWS_AS(inexact_ogd_step(x, Matrix::Zero(2, 2), 0.1, simplex), InvalidInput);
}

TEST_CASE("one inner step equals a plain step") {
  Rng rng(1);
  Matrix x = oracle::random_policy(rng, 3, 4);
  Matrix target = oracle::random_policy(rng, 3, 4);
  const GradientOracle grad = [&](const Matrix& z) { return Matrix(z - target); };
  const Projector p = shrinkage_simplex_projector(0.01);
  CHECK(inexact_multi_ogd(x, grad, 0.2, 1, p) == inexact_ogd_step(x, grad(x), 0.2, p));
  CHECK_THROWS_AS(inexact_multi_ogd(x, grad, 0.2, 0, p), InvalidInput);
}

TEST_CASE("contraction on an exact quadratic") {
  CHECK(contraction_steps(1.0, 0.25) == 4);
  Rng rng(2);
  Matrix x_star(1, 5);
  Matrix x(1, 5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    x_star(i) = rng.normal();
    x(i) = rng.normal();
  }
  const GradientOracle grad = [&](const Matrix& z) { return Matrix(z - x_star); };
  const Matrix z = inexact_multi_ogd(x, grad, 0.25, 4, identity_projector());
  const double ratio = (z - x_star).squaredNorm() / (x - x_star).squaredNorm();
  CHECK(ratio == doctest::Approx(std::pow(0.75, 8)).epsilon(1e-12));
  CHECK(ratio <= std::pow(1.0 / 1.25, 4));
  CHECK(ratio <= 0.5);
}

TEST_CASE("perturbed gradients stay within the derived error bound") {
  // With q = 1 - alpha lambda and ||e|| <= sqrt(2 eps L), K steps give
  // ||z - x*|| <= q^K ||x - x*|| + ||e|| / lambda, hence
  // ||z - x*||^2 <= (1/2) ||x - x*||^2 + 4 eps L / lambda^2 once (1 + lambda alpha)^K >= 2.
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda = rng.uniform(0.5, 2.0);
    const double smooth = lambda;
    const double alpha = 1.0 / (2.0 * smooth);
    const double eps = rng.uniform(0.0, 0.01);
    const std::size_t k = contraction_steps(lambda, alpha);
    Matrix x_star(1, 4);
    Matrix x(1, 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      x_star(i) = rng.uniform(0.2, 0.8);
      x(i) = rng.uniform(-2.0, 2.0);
    }
    const GradientOracle grad = [&](const Matrix& z) {
      Matrix e(1, 4);
      for (Eigen::Index i = 0; i < 4; ++i) e(i) = rng.normal();
      e *= std::sqrt(2.0 * eps * smooth) * rng.uniform01() / e.norm();
      return Matrix(lambda * (z - x_star) + e);
    };
    const Matrix z = inexact_multi_ogd(x, grad, alpha, k, box_projector(0.0, 1.0));
    const double bound = 0.5 * (x - x_star).squaredNorm() + 4.0 * eps * smooth / (lambda * lambda);
    CHECK((z - x_star).squaredNorm() <= bound + 1e-12);
  }
}

TEST_CASE("subgradient of a close function is a 2eps-subgradient") {
  Rng rng(4);
  const double eps = 0.01;
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(-2.0, 2.0);
    const double y = rng.uniform(-2.0, 2.0);
    const auto f = [](double t) { return t * t; };
    const auto g = [&](double t) { return t * t + eps * std::sin(7.0 * t); };
    const double sub = 2.0 * x;
    CHECK(g(y) >= g(x) + sub * (y - x) - 2.0 * eps - 1e-15);
    CHECK(std::abs(f(y) - g(y)) <= eps);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("projector factories") {
  CHECK_THROWS_AS(box_projector(1.0, 0.0), InvalidInput);
  Matrix m(1, 2);
  m << -1.0, 3.0;
  const Matrix b = box_projector(0.0, 1.0)(m);
  CHECK(b(0, 0) == 0.0);
  CHECK(b(0, 1) == 1.0);
  CHECK(identity_projector()(m) == m);
}
