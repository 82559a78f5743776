#include <doctest.h>

#include <cmath>

#include "metasrl/cmdp.hpp"
#include "metasrl/error.hpp"
#include "oracles.hpp"

using namespace metasrl;

namespace {

// Two states that swap deterministically under the single action.
TabularCmdp cycle(double gamma, Vector rho) {
  Matrix p(2, 2);
  p << 0, 1, 1, 0;
  Matrix r(2, 1);
  r << 1, 0;
  return TabularCmdp(2, 1, p, r, {}, {}, gamma, std::move(rho), 1.0);
}

TabularCmdp constant_reward(double c, double gamma) {
  Rng rng(3);
  Matrix p(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i) p.row(i) = rng.dirichlet(3).transpose();
  return TabularCmdp(3, 2, p, Matrix::Constant(3, 2, c), {Matrix::Zero(3, 2)}, {0.5}, gamma,
                     Vector::Constant(3, 1.0 / 3.0), 1.0);
}

}  // namespace

TEST_CASE("softmax from logits") {
  SoftmaxPolicy zero = policy_from_logits(Matrix::Zero(3, 2));
  CHECK((zero.probs().array() - 0.5).abs().maxCoeff() < 1e-15);

  Matrix logits(1, 2);
  logits << std::log(3.0), 0.0;
  SoftmaxPolicy p = policy_from_logits(logits);
  CHECK(p.probs()(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p.probs()(0, 1) == doctest::Approx(0.25).epsilon(1e-14));

  Rng rng(1);
  Matrix theta(4, 3);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal();
  Matrix shifted = theta.array() + 7.0;
  CHECK((policy_from_logits(theta).probs() - policy_from_logits(shifted).probs()).cwiseAbs().maxCoeff() <
        1e-14);

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(policy_from_logits(bad), InvalidInput);
  CHECK_THROWS_AS(SoftmaxPolicy::from_probabilities(Matrix::Zero(1, 2)), InvalidInput);
}

TEST_CASE("cmdp validation") {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.2, 0.8;
  Matrix r = Matrix::Constant(2, 1, 0.5);
  Vector rho = Vector::Constant(2, 0.5);
  CHECK_NOTHROW(TabularCmdp(2, 1, p, r, {}, {}, 0.9, rho, 1.0));
  CHECK_THROWS_AS(TabularCmdp(2, 1, p, r, {}, {}, 1.0, rho, 1.0), InvalidInput);
  Matrix not_stochastic = p;
  not_stochastic(0, 0) = 0.6;
  CHECK_THROWS_AS(TabularCmdp(2, 1, not_stochastic, r, {}, {}, 0.9, rho, 1.0), InvalidInput);
  CHECK_THROWS_AS(TabularCmdp(2, 1, p, Matrix::Constant(2, 1, 2.0), {}, {}, 0.9, rho, 1.0), InvalidInput);
  CHECK_THROWS_AS(TabularCmdp(2, 1, p, r, {r}, {}, 0.9, rho, 1.0), InvalidInput);
  CHECK_THROWS_AS(TabularCmdp(2, 1, p, r, {}, {}, 0.9, Vector::Constant(2, 0.6), 1.0), InvalidInput);
  CHECK_THROWS_AS(TabularCmdp(2, 1, p, r, {}, {}, 0.9, rho, 0.0), InvalidInput);
}

TEST_CASE("policy evaluation closed forms") {
  const TabularCmdp m = constant_reward(0.7, 0.9);
  const PolicyTable pi = PolicyTable::Constant(3, 2, 0.5);
  const ValueTable v = policy_evaluation_exact(m, pi, 0);
  CHECK((v.v.array() - 7.0).abs().maxCoeff() < 1e-12);
  CHECK(expected_objective(m, pi, 0) == doctest::Approx(7.0).epsilon(1e-12));
  const ValueTable zero = policy_evaluation_exact(m, pi, 1);
  CHECK(zero.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.q.cwiseAbs().maxCoeff() == 0.0);
  CHECK(expected_objective(m, pi, 1) == 0.0);

  const TabularCmdp c = cycle(0.5, Vector::Unit(2, 0));
  const ValueTable cv = policy_evaluation_exact(c, PolicyTable::Ones(2, 1), 0);
  CHECK(cv.v(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(cv.v(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(policy_evaluation_exact(m, pi, 2), InvalidInput);
  CHECK_THROWS_AS(policy_evaluation_exact(m, PolicyTable::Constant(3, 2, 0.3), 0), InvalidInput);
}

TEST_CASE("visitation closed forms") {
  const TabularCmdp c = cycle(0.5, Vector::Unit(2, 0));
  const Vector nu = visitation_exact(c, PolicyTable::Ones(2, 1)).nu;
  CHECK(nu(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(nu(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const TabularCmdp single(1, 1, Matrix::Ones(1, 1), Matrix::Zero(1, 1), {}, {}, 0.9, Vector::Ones(1), 1.0);
  CHECK(visitation_exact(single, PolicyTable::Ones(1, 1)).nu(0) == doctest::Approx(1.0));

  Rng rng(5);
  const TabularCmdp r = oracle::random_cmdp(rng, 4, 2, 1, 1e-12);
  const PolicyTable pi = oracle::random_policy(rng, 4, 2);
  CHECK((visitation_exact(r, pi).nu - r.initial_dist()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("evaluation matches iterative and occupancy identity") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const TabularCmdp m = oracle::random_cmdp(rng, 5, 3, 2, 0.9);
    const PolicyTable pi = oracle::random_policy(rng, 5, 3);
    const Matrix occ = visitation_exact(m, pi).state_action(pi);
    const auto all = expected_objectives(m, pi);
    for (std::size_t i = 0; i < m.num_objectives(); ++i) {
      const Vector direct = policy_evaluation_exact(m, pi, i).v;
      CHECK((direct - oracle::iterative_values(m, pi, i)).cwiseAbs().maxCoeff() < 1e-9);
      const double j = expected_objective(m, pi, i);
      CHECK(std::abs(j - occ.cwiseProduct(m.objective(i)).sum() / (1.0 - m.discount())) < 1e-8);
      CHECK(std::abs(j - all[i]) < 1e-10);
    }
  }
}

TEST_CASE("expected objective matches Monte Carlo returns") {
  Rng rng(21);
  const TabularCmdp m = oracle::random_cmdp(rng, 3, 2, 1, 0.8);
  const PolicyTable pi = oracle::random_policy(rng, 3, 2);
  const double j = expected_objective(m, pi, 0);
  // Unbiased single-sample estimate: reward at the geometric stopping state, scaled.
  const std::size_t n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    auto s = static_cast<Eigen::Index>(rng.categorical(m.initial_dist()));
    double ret = 0.0;
    double disc = 1.0;
    for (int t = 0; t < 200; ++t) {
      const auto a = static_cast<Eigen::Index>(rng.categorical(pi.row(s)));
      ret += disc * m.reward()(s, a);
      disc *= m.discount();
      s = static_cast<Eigen::Index>(rng.categorical(m.transition().row(s * 2 + a)));
    }
    sum += ret;
    sq += ret * ret;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - j) < 3.0 * se + 1e-12);
}

TEST_CASE("json round trip is exact") {
  Rng rng(8);
  const TabularCmdp m = oracle::random_cmdp(rng, 4, 3, 2, 0.93);
  const TabularCmdp back = cmdp_from_json(to_json(m));
  CHECK(back == m);
  CHECK(to_json(back) == to_json(m));
  CHECK_THROWS_AS(cmdp_from_json("{\"n_states\": 2}"), InvalidInput);
  CHECK_THROWS_AS(cmdp_from_json("not json"), InvalidInput);
  CHECK_THROWS_AS(load_cmdp("/nonexistent/file.json"), IoError);
}
