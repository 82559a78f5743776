#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metasrl/cmdp.hpp"
#include "metasrl/oracle.hpp"

namespace metasrl {

/// What the meta-level accounting needs from one finished task.
struct TaskEvaluation {
  /// Initialization phi_t the task started from.
  PolicyTable init_policy;
  /// Estimated visitation and returned policy feeding the plug-in loss.
  Vector nu_hat;
  PolicyTable pi_hat;
  /// J_0..J_p of the returned policy, averaged over seeds.
  std::vector<double> objective_values;
  /// Learning rate used for the task (zero if not tracked).
  double kappa = 0.0;
};

struct TaskRegretRow {
  double gap = 0.0;
  std::vector<double> violation;
  double kl_term = 0.0;
  double kappa = 0.0;
  /// |E_{nu*}KL(pi*||phi_t) - E_{nu_hat}KL(pi_hat||phi_t)|; NaN without an oracle.
  double inexactness = 0.0;
};

struct RegretReport {
  /// Mean gap over the tasks whose oracle is feasible.
  double taog = 0.0;
  std::vector<double> tacv;
  std::vector<double> tacv_clipped;
  double static_regret = 0.0;
  std::optional<double> dynamic_regret;
  double d_hat_sq = 0.0;
  std::optional<double> v_hat_sq;
  std::optional<double> path_length;
  std::optional<double> sq_path_length;
  std::vector<double> inexactness_proxy;
  std::vector<TaskRegretRow> tasks;
  PolicyTable similarity_center;

  std::string to_json() const;
  /// One row per task.
  std::string to_csv() const;
};

/// Path lengths of a comparator sequence under the Frobenius norm.
std::pair<double, double> path_lengths(const std::vector<PolicyTable>& comparators);

RegretReport regret_report(const std::vector<OptimalSolution>& oracle_solutions,
                           const std::vector<TaskEvaluation>& tasks,
                           const std::vector<TabularCmdp>& cmdps,
                           const std::optional<std::vector<PolicyTable>>& comparators,
                           double shrinkage);

}  // namespace metasrl
