#include <doctest.h>

#include <cmath>

#include "metasrl/dice.hpp"
#include "metasrl/divergence.hpp"
#include "metasrl/error.hpp"
#include "oracles.hpp"

using namespace metasrl;

namespace {

Matrix random_positive_table(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix d(rows, cols);
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = 0.2 + rng.uniform01();
  return d / d.sum();
}

}  // namespace

TEST_CASE("direct solve is exact on exact-expectation data") {
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const TabularCmdp m = oracle::random_cmdp(rng, 3, 2, 1, 0.9);
    const PolicyTable pi = oracle::random_policy(rng, 3, 2);
    const Matrix d = random_positive_table(rng, 3, 2);
    TrajectoryDataset data(3, 2, 1);
    oracle::fill_exact_dataset(m, d, data);
    const CorrectionTable fit = dualdice_fit(data, pi, m.discount());
    const Matrix nu_sa = visitation_exact(m, pi).state_action(pi);
    CHECK((fit.omega - nu_sa.cwiseQuotient(d)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(fit.residual <= 1e-8);
    CHECK_FALSE(fit.coverage_warning);
    CHECK(fit.normalization == doctest::Approx(1.0).epsilon(1e-8));
    const Vector nu_hat = visitation_from_corrections(data, fit).nu;
    CHECK((nu_hat - visitation_exact(m, pi).nu).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("on-policy data gives unit ratios") {
  Rng rng(2);
  const TabularCmdp m = oracle::random_cmdp(rng, 3, 2, 1, 0.8);
  const PolicyTable pi = oracle::random_policy(rng, 3, 2);
  TrajectoryDataset data(3, 2, 1);
  oracle::fill_exact_dataset(m, visitation_exact(m, pi).state_action(pi), data);
  const CorrectionTable fit = dualdice_fit(data, pi, m.discount());
  CHECK((fit.omega.array() - 1.0).abs().maxCoeff() < 1e-6);

  // Sampled on-policy episodes: the discounted stopping chain.
  TrajectoryDataset sampled(3, 2, 1);
  for (int e = 0; e < 20000; ++e) {
    auto s = rng.categorical(m.initial_dist());
    sampled.add_initial_state(s);
    while (true) {
      const auto a = rng.categorical(pi.row(static_cast<Eigen::Index>(s)));
      const auto n = rng.categorical(m.transition().row(static_cast<Eigen::Index>(m.row(s, a))));
      Transition tr;
      tr.s = s;
      tr.a = a;
      tr.s_next = n;
      sampled.add_transition(tr);
      if (rng.uniform01() >= m.discount()) break;
      s = n;
    }
  }
  const CorrectionTable approx = dualdice_fit(sampled, pi, m.discount());
  CHECK((approx.omega.array() - 1.0).abs().maxCoeff() <= 0.1);
}

TEST_CASE("single sgd step from zero") {
  TrajectoryDataset data(2, 2, 0);
  Transition tr;
  tr.s = 0;
  tr.a = 1;
  tr.s_next = 1;
  data.add_transition(tr);
  data.add_initial_state(1);
  PolicyTable pi(2, 2);
  pi << 0.5, 0.5, 0.3, 0.7;
  DiceConfig cfg;
  cfg.solver = DiceSolver::Sgd;
  cfg.sgd_steps = 1;
  cfg.sgd_step_size = 0.5;
  cfg.rng_seed = 4;
  const double g = 0.9;
  // z gains lr (1-g) pi(s0,.) on the s0 block; omega(0,1) = z(0,1) - g pi(1,.) z(1,.).
  const double z10 = 0.5 * 0.1 * 0.3;
  const double z11 = 0.5 * 0.1 * 0.7;
  const double expected = std::max(0.0, 0.0 - g * (0.3 * z10 + 0.7 * z11));
  const CorrectionTable a = dualdice_fit(data, pi, g, cfg);
  CHECK(a.omega(0, 1) == doctest::Approx(expected).epsilon(1e-15));
  const CorrectionTable b = dualdice_fit(data, pi, g, cfg);
  CHECK(a.omega == b.omega);
}

TEST_CASE("sgd approaches the direct solution") {
  Rng rng(5);
  const TabularCmdp m = oracle::random_cmdp(rng, 3, 2, 1, 0.5);
  const PolicyTable pi = oracle::random_policy(rng, 3, 2);
  const Matrix d = random_positive_table(rng, 3, 2);
  TrajectoryDataset data(3, 2, 1);
  oracle::fill_exact_dataset(m, d, data);
  DiceConfig cfg;
  cfg.solver = DiceSolver::Sgd;
  cfg.sgd_steps = 200000;
  cfg.sgd_step_size = 0.01;
  const Matrix exact = dualdice_fit(data, pi, m.discount()).omega;
  const Matrix approx = dualdice_fit(data, pi, m.discount(), cfg).omega;
  CHECK((exact - approx).cwiseAbs().maxCoeff() < 0.25);
}

TEST_CASE("visitation from corrections edge cases") {
  TrajectoryDataset data(3, 2, 0);
  Transition tr;
  tr.s = 2;
  tr.a = 0;
  tr.s_next = 2;
  data.add_transition(tr);
  tr.a = 1;
  data.add_transition(tr);
  CorrectionTable ones;
  ones.omega = Matrix::Ones(3, 2);
  CHECK(visitation_from_corrections(data, ones).nu == Vector::Unit(3, 2));

  Rng rng(6);
  TrajectoryDataset mixed(3, 2, 0);
  for (int k = 0; k < 50; ++k) {
    Transition t;
    t.s = rng.index(3);
    t.a = rng.index(2);
    t.s_next = rng.index(3);
    mixed.add_transition(t);
  }
  const Vector marginal = mixed.counts().rowwise().sum();
  CHECK((visitation_from_corrections(mixed, ones).nu - marginal).cwiseAbs().maxCoeff() < 1e-14);

  CorrectionTable zero;
  zero.omega = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(visitation_from_corrections(mixed, zero), DegenerateEstimate);
}

TEST_CASE("fit input errors") {
  TrajectoryDataset empty(2, 2, 0);
  CHECK_THROWS_AS(dualdice_fit(empty, PolicyTable::Constant(2, 2, 0.5), 0.9), InvalidInput);
}

TEST_CASE("uncovered target pairs raise a coverage warning") {
  Rng rng(7);
  const TabularCmdp m = oracle::random_cmdp(rng, 3, 2, 1, 0.9);
  Matrix d = random_positive_table(rng, 3, 2);
  d(1, 0) = 0.0;
  TrajectoryDataset data(3, 2, 1);
  oracle::fill_exact_dataset(m, d, data);
  const CorrectionTable fit = dualdice_fit(data, PolicyTable::Constant(3, 2, 0.5), 0.9);
  CHECK(fit.coverage_warning);
  CHECK_FALSE(fit.coverage_mask(1, 0));
  CHECK(fit.omega(1, 0) == 0.0);
  CHECK(fit.omega.minCoeff() >= 0.0);
}

TEST_CASE("kl loss values and gradient") {
  Rng rng(8);
  const PolicyTable phi = oracle::random_policy(rng, 4, 3);
  VisitationDistribution nu{rng.dirichlet(4)};
  CHECK(kl_loss_and_grad(nu, phi, phi).first == 0.0);

  const PolicyTable pi = oracle::random_policy(rng, 4, 3);
  VisitationDistribution point{Vector::Unit(4, 2)};
  CHECK(kl_loss_and_grad(point, pi, phi).first ==
        doctest::Approx(kl_divergence(pi.row(2), phi.row(2))).epsilon(1e-14));

  for (int k = 0; k < 20; ++k) {
    const PolicyTable p = oracle::random_policy(rng, 4, 3);
    const PolicyTable q = (oracle::random_policy(rng, 4, 3).array() + 0.05).matrix();
    VisitationDistribution v{rng.dirichlet(4)};
    const auto [loss, grad] = kl_loss_and_grad(v, p, q);
    CHECK(loss >= 0.0);
    const Matrix fd = oracle::central_difference(
        [&](const Matrix& x) {
          double total = 0.0;
          for (Eigen::Index s = 0; s < 4; ++s)
            for (Eigen::Index a = 0; a < 3; ++a) total += v.nu(s) * p(s, a) * std::log(p(s, a) / x(s, a));
          return total;
        },
        q, 1e-6);
    CHECK((grad - fd).cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + grad.cwiseAbs().maxCoeff()));
  }
  CHECK_THROWS_AS(kl_loss_and_grad(nu, phi, Matrix::Zero(4, 3)), InvalidInput);
}

TEST_CASE("error decomposition telescopes") {
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const PolicyTable pi_star = oracle::random_policy(rng, 4, 2);
    const PolicyTable pi_hat = oracle::random_policy(rng, 4, 2);
    const PolicyTable phi = oracle::random_policy(rng, 4, 2);
    const Vector a = rng.dirichlet(4);
    const Vector b = rng.dirichlet(4);
    const Vector c = rng.dirichlet(4);
    const ErrorDecomposition e = decompose_kl_error(a, pi_star, b, c, pi_hat, phi);
    CHECK(std::abs(e.total - (e.visitation_mismatch + e.estimation + e.policy_mismatch)) < 1e-12);
    CHECK(std::abs(e.total) <=
          std::abs(e.visitation_mismatch) + std::abs(e.estimation) + std::abs(e.policy_mismatch) + 1e-10);
  }
}

TEST_CASE("correction csv") {
  CorrectionTable t;
  t.omega = Matrix::Constant(1, 2, 0.5);
  t.coverage_mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(1, 2, true);
  t.coverage_mask(0, 1) = false;
  CHECK(t.to_csv() == "s,a,omega,covered\n0,0,0.5,1\n0,1,0.5,0\n");
}
