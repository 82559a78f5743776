#include <doctest.h>

#include <cmath>

#include "metasrl/divergence.hpp"
#include "metasrl/error.hpp"
#include "metasrl/meta.hpp"
#include "metasrl/projection.hpp"
#include "oracles.hpp"

using namespace metasrl;

namespace {

PolicyTable kl_center_row_table(const PolicyTable& pi, double rho) {
  PolicyTable out(pi.rows(), pi.cols());
  for (Eigen::Index s = 0; s < pi.rows(); ++s) out.row(s) = kl_center_row(pi.row(s).transpose(), rho).transpose();
  return out;
}

}  // namespace

TEST_CASE("sim constants") {
  const SimConstants c = make_sim_constants(0.9, 1.0, 16, 4);
  CHECK(c.c1 == 2.0);
  CHECK(c.c2 == doctest::Approx(4.0 * 64 / 1e-3).epsilon(1e-12));
  CHECK(c.c3 == doctest::Approx((3.0 + 0.01) / 0.01).epsilon(1e-12));
  CHECK(c.c4 == doctest::Approx(3.0 / 0.01).epsilon(1e-12));
  CHECK(c.c5 > 0.0);
  CHECK_THROWS_AS(make_sim_constants(1.0, 1.0, 2, 2), InvalidInput);
}

TEST_CASE("sim loss closed forms") {
  const SimConstants c = make_sim_constants(0.9, 1.0, 16, 4);
  const auto [loss0, grad0] = sim_loss_and_grad(0.3, 0.0, 100, c);
  const double slope = c.c2 * 100 + c.c4 * 10;
  CHECK(loss0 == doctest::Approx(0.3 * slope + c.c3 * 10));
  CHECK(grad0 == doctest::Approx(slope));

  const double kappa = std::sqrt(c.c1 * 2.5 / slope);
  CHECK(std::abs(sim_loss_and_grad(kappa, 2.5, 100, c).second) < 1e-9 * slope);

  const auto f = [&](double k) { return sim_loss_and_grad(k, 1.0, 100, c).first; };
  const double fd = oracle::central_difference(std::function<double(double)>(f), 0.01, 1e-7);
  const double g = sim_loss_and_grad(0.01, 1.0, 100, c).second;
  CHECK(std::abs(fd - g) <= 1e-6 * std::abs(g));

  CHECK_THROWS_AS(sim_loss_and_grad(0.0, 1.0, 10, c), InvalidInput);
  CHECK_THROWS_AS(sim_loss_and_grad(0.1, -1.0, 10, c), InvalidInput);
}

TEST_CASE("sim ogd converges to the stationary rate") {
  SimConstants c;
  c.c2 = 1.0;
  c.c3 = 1.0;
  c.c4 = 0.5;
  const std::size_t m = 4;
  const double target = std::sqrt(2.0 * 0.3 / (4.0 + 1.0));
  double kappa = 1.0;
  for (int k = 0; k < 10000; ++k) kappa = std::max(1e-4, kappa - 0.01 * sim_loss_and_grad(kappa, 0.3, m, c).second);
  CHECK(std::abs(kappa - target) < 1e-4);
}

TEST_CASE("meta update examples") {
  MetaHyperparameters hp;
  hp.shrinkage = 0.05;
  hp.rate_floor = 0.01;
  hp.beta_sim = 1e-3;
  hp.beta_init = 0.5;
  hp.inner_updates = 3;
  Rng rng(1);
  const PolicyTable phi = project_rows_shrinkage_simplex(oracle::random_policy(rng, 3, 2), 0.05);
  const MetaLearnerState state(phi, 0.2, hp);
  VisitationDistribution nu{rng.dirichlet(3)};
  const SimConstants c = make_sim_constants(0.9, 1.0, 3, 2);

  const MetaLearnerState same = meta_update(state, nu, phi, 10, c);
  CHECK((same.phi() - phi).cwiseAbs().maxCoeff() < 1e-12);
  const double slope = c.c2 * 10 + c.c4 * std::sqrt(10.0);
  CHECK(same.kappa() == doctest::Approx(std::max(0.01, 0.2 - 1e-3 * slope)));
  CHECK(same.history().size() == 1);
  CHECK(same.history()[0].kl_term == doctest::Approx(0.0).epsilon(1e-15));

  const PolicyTable pi_hat = oracle::random_policy(rng, 3, 2);
  MetaLearnerState s = state;
  double prev = (s.phi() - project_rows_shrinkage_simplex(pi_hat, 0.05)).norm();
  for (int t = 0; t < 20; ++t) {
    s = meta_update(s, nu, pi_hat, 10, c);
    CHECK(in_shrinkage_simplex(s.phi(), 0.05, 1e-12));
    CHECK(s.kappa() >= hp.rate_floor);
    const double dist = (s.phi() - kl_center_row_table(pi_hat, 0.05)).norm();
    if (prev > 1e-9) CHECK(dist < prev);
    prev = dist;
  }
}

TEST_CASE("state invariants") {
  MetaHyperparameters hp;
  hp.shrinkage = 0.3;
  CHECK_THROWS_AS(MetaLearnerState::uniform(2, 4, 0.1, hp), InvalidInput);
  hp.shrinkage = 0.01;
  CHECK_THROWS_AS(MetaLearnerState::uniform(2, 4, 1e-6, hp), InvalidInput);
  hp.inner_updates = 0;
  CHECK_THROWS_AS(MetaLearnerState::uniform(2, 4, 0.1, hp), InvalidInput);
  hp.inner_updates = 1;
  const MetaLearnerState s = MetaLearnerState::uniform(2, 4, 0.1, hp);
  CHECK(s.beta_init() == doctest::Approx(1.0));
  hp.horizon = 16;
  CHECK(MetaLearnerState::uniform(2, 4, 0.1, hp).beta_init() == doctest::Approx(0.25));
}

TEST_CASE("similarity center examples") {
  Rng rng(2);
  const PolicyTable pi = project_rows_shrinkage_simplex(oracle::random_policy(rng, 3, 3), 0.02);
  std::vector<std::pair<Vector, PolicyTable>> same = {{rng.dirichlet(3), pi}, {rng.dirichlet(3), pi}};
  const SimilarityCenter a = closed_form_similarity_center(same, 0.02);
  CHECK((a.phi - pi).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.d_hat_sq < 1e-14);

  PolicyTable p1(1, 2);
  p1 << 0.8, 0.2;
  PolicyTable p2(1, 2);
  p2 << 0.2, 0.8;
  const SimilarityCenter b = closed_form_similarity_center({{Vector::Ones(1), p1}, {Vector::Ones(1), p2}}, 0.0);
  CHECK(b.phi(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  const double expected = 0.5 * (0.8 * std::log(1.6) + 0.2 * std::log(0.4)) * 2.0;
  CHECK(b.d_hat_sq == doctest::Approx(expected).epsilon(1e-12));

  Vector nu(2);
  nu << 1.0, 0.0;
  const SimilarityCenter c = closed_form_similarity_center({{nu, oracle::random_policy(rng, 2, 4)}}, 0.0);
  CHECK((c.phi.row(1).array() - 0.25).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(closed_form_similarity_center({}, 0.0), InvalidInput);
}

TEST_CASE("kl center row matches bisection") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(5));
    Vector m = rng.dirichlet(static_cast<std::size_t>(n));
    if (k % 3 == 0) m(0) = 0.0;
    m /= m.sum();
    const double rho = rng.uniform01() * 0.9 / static_cast<double>(n);
    const Vector phi = kl_center_row(m, rho);
    CHECK((phi - oracle::kl_center_bisection(m, rho)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(phi.minCoeff() >= rho - 1e-12);
  }
}

TEST_CASE("optimal kappa minimizes the rate bound") {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    RateBoundInputs in;
    in.u_sim = rng.uniform(0.0, 5.0);
    in.u_init = rng.uniform(0.1, 5.0);
    in.inexactness = rng.uniform(0.0, 1.0);
    in.v_hat_sq = rng.uniform(0.0, 0.5);
    in.num_tasks = 1 + rng.index(20);
    in.steps = 1 + rng.index(200);
    in.constants = make_sim_constants(rng.uniform(0.5, 0.95), 1.0, 4, 2);
    const double kstar = optimal_kappa(in);
    const double grid = oracle::grid_argmin([&](double x) { return rate_bound(x, in); }, kstar * 1e-3,
                                            kstar * 1e3);
    CHECK(std::abs(grid - kstar) <= 1e-4 * kstar);
  }
}
