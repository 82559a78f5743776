#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace metasrl {

/// maximize c^T x  subject to  A x = b,  x >= 0.
struct LinearProgram {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOptions {
  std::size_t max_iterations = 100000;
  std::size_t refactor_interval = 50;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-10;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  /// Row multipliers y with A^T y >= c at optimality.
  Eigen::VectorXd duals;
  double objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;
  /// max_j (c_j - A_j^T y)^+ ; zero for an exact dual certificate.
  double dual_infeasibility = 0.0;
  /// Sum of artificial values left after phase one.
  double infeasibility = 0.0;
  std::size_t iterations = 0;
};

/// Dense two-phase revised simplex with Bland's anti-cycling rule.
/// Throws NumericalFailure (carrying the current objective) when the
/// iteration cap is reached.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace metasrl
