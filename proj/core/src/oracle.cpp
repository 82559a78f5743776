#include "metasrl/oracle.hpp"

#include <cmath>
#include <string>

#include "metasrl/error.hpp"

namespace metasrl {

OptimalSolution solve_optimal_lp(const TabularCmdp& cmdp, const LpOptions& options) {
  const auto ns = static_cast<Eigen::Index>(cmdp.n_states());
  const auto na = static_cast<Eigen::Index>(cmdp.n_actions());
  const Eigen::Index nsa = ns * na;
  const double g = cmdp.discount();
  const double sentinel = cmdp.unconstrained_limit();

  std::vector<std::size_t> active;
  for (std::size_t i = 1; i <= cmdp.num_constraints(); ++i)
    if (std::isfinite(cmdp.limit(i)) && cmdp.limit(i) < sentinel) active.push_back(i);
  const auto p = static_cast<Eigen::Index>(active.size());

  LinearProgram lp;
  lp.a = Matrix::Zero(ns + p, nsa + p);
  lp.b = Vector::Zero(ns + p);
  lp.c = Vector::Zero(nsa + p);
  for (Eigen::Index s = 0; s < ns; ++s) {
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index col = s * na + a;
      lp.a(s, col) += 1.0;
      for (Eigen::Index next = 0; next < ns; ++next)
        lp.a(next, col) -= g * cmdp.transition()(col, next);
      lp.c(col) = cmdp.reward()(s, a);
    }
    lp.b(s) = (1.0 - g) * cmdp.initial_dist()(s);
  }
  for (Eigen::Index k = 0; k < p; ++k) {
    const Matrix& cost = cmdp.objective(active[static_cast<std::size_t>(k)]);
    for (Eigen::Index s = 0; s < ns; ++s)
      for (Eigen::Index a = 0; a < na; ++a) lp.a(ns + k, s * na + a) = cost(s, a);
    lp.a(ns + k, nsa + k) = 1.0;
    lp.b(ns + k) = (1.0 - g) * cmdp.limit(active[static_cast<std::size_t>(k)]);
  }

  const LpResult res = solve_lp(lp, options);
  OptimalSolution out;
  out.lp_iterations = res.iterations;
  if (res.status == LpStatus::Infeasible) {
    out.feasible = false;
    return out;
  }
  if (res.status == LpStatus::Unbounded)
    throw NumericalFailure("occupancy LP reported unbounded");

  out.feasible = true;
  out.duality_gap = res.duality_gap;
  out.dual_infeasibility = res.dual_infeasibility;
  out.occupancy = res.x.head(nsa).reshaped(na, ns).transpose();
  out.policy = PolicyTable(ns, na);
  const double floor = 1e-14 * out.occupancy.sum();
  for (Eigen::Index s = 0; s < ns; ++s) {
    const double mass = out.occupancy.row(s).sum();
    if (mass > floor)
      out.policy.row(s) = out.occupancy.row(s) / mass;
    else
      out.policy.row(s).setConstant(1.0 / static_cast<double>(na));
  }
  out.visitation = visitation_exact(cmdp, out.policy);
  out.objective_values = expected_objectives(cmdp, out.policy);
  return out;
}

void revalidate(const TabularCmdp& cmdp, const OptimalSolution& solution, double tol) {
  if (!solution.feasible) return;
  const std::vector<double> fresh = expected_objectives(cmdp, solution.policy);
  for (std::size_t i = 0; i < fresh.size(); ++i)
    if (std::abs(fresh[i] - solution.objective_values[i]) > tol)
      throw NumericalFailure("cached oracle value J_" + std::to_string(i) + " drifted by " +
                             std::to_string(std::abs(fresh[i] - solution.objective_values[i])));
}

}  // namespace metasrl
