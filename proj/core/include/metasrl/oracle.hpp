#pragma once

#include <vector>

#include "metasrl/cmdp.hpp"
#include "metasrl/simplex_lp.hpp"

namespace metasrl {

struct OptimalSolution {
  /// Stationary policy; rows may sit on the simplex boundary.
  PolicyTable policy;
  VisitationDistribution visitation;
  /// Normalized state-action occupancy mu(s,a) returned by the LP.
  Matrix occupancy;
  /// J_0..J_p recomputed from `policy` by exact evaluation.
  std::vector<double> objective_values;
  bool feasible = false;
  double duality_gap = 0.0;
  double dual_infeasibility = 0.0;
  std::size_t lp_iterations = 0;
};

/// Occupancy-measure LP for the constrained problem. Limits at or above the
/// unconstrained sentinel (or infinite) are dropped from the program.
OptimalSolution solve_optimal_lp(const TabularCmdp& cmdp, const LpOptions& options = {});

/// Recomputes J_i from the cached policy; throws NumericalFailure if they
/// drift from the stored values by more than `tol`.
void revalidate(const TabularCmdp& cmdp, const OptimalSolution& solution, double tol = 1e-8);

}  // namespace metasrl
