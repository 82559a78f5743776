#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace metasrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row-stochastic table pi(a|s), one row per state.
using PolicyTable = Matrix;

/// Finite constrained MDP with discounted criterion.
///
/// Objective 0 is the reward c_0, objectives 1..p are the costs c_i with
/// limits d_i. The transition tensor is stored as an (S*A) x S matrix whose
/// row s*A + a is P(.|s,a).
class TabularCmdp {
 public:
  TabularCmdp(std::size_t n_states, std::size_t n_actions, Matrix transition,
              Matrix reward, std::vector<Matrix> costs, std::vector<double> limits,
              double discount, Vector initial_dist, double c_max);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t num_constraints() const { return costs_.size(); }
  std::size_t num_objectives() const { return costs_.size() + 1; }
  double discount() const { return discount_; }
  double c_max() const { return c_max_; }

  const Matrix& transition() const { return transition_; }
  const Matrix& reward() const { return reward_; }
  const std::vector<Matrix>& costs() const { return costs_; }
  const std::vector<double>& limits() const { return limits_; }
  const Vector& initial_dist() const { return initial_dist_; }

  /// Objective table: 0 is the reward, i >= 1 is cost i.
  const Matrix& objective(std::size_t index) const;
  double limit(std::size_t constraint_index) const;

  std::size_t row(std::size_t s, std::size_t a) const { return s * n_actions_ + a; }
  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_(static_cast<Eigen::Index>(row(s, a)), static_cast<Eigen::Index>(next));
  }

  /// Limit value that never binds: c_max / (1 - gamma) + 1.
  double unconstrained_limit() const;

  friend bool operator==(const TabularCmdp&, const TabularCmdp&) = default;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  Matrix transition_;
  Matrix reward_;
  std::vector<Matrix> costs_;
  std::vector<double> limits_;
  double discount_;
  Vector initial_dist_;
  double c_max_;
};

/// Limit sentinel for a cost that should never bind.
double unconstrained_limit(double c_max, double discount);

/// Tabular softmax policy pi_theta(a|s) = exp(theta(s,a)) / sum_b exp(theta(s,b)).
class SoftmaxPolicy {
 public:
  /// Builds the policy from logits; throws InvalidInput on non-finite entries.
  static SoftmaxPolicy from_logits(Matrix logits);
  /// Builds the policy whose logits are log(probs); every entry must be > 0.
  static SoftmaxPolicy from_probabilities(const PolicyTable& probs);
  /// Uniform policy (zero logits).
  static SoftmaxPolicy uniform(std::size_t n_states, std::size_t n_actions);

  const Matrix& logits() const { return logits_; }
  const PolicyTable& probs() const { return probs_; }
  std::size_t n_states() const { return static_cast<std::size_t>(logits_.rows()); }
  std::size_t n_actions() const { return static_cast<std::size_t>(logits_.cols()); }

 private:
  SoftmaxPolicy(Matrix logits, PolicyTable probs)
      : logits_(std::move(logits)), probs_(std::move(probs)) {}

  Matrix logits_;
  PolicyTable probs_;
};

SoftmaxPolicy policy_from_logits(const Matrix& logits);

struct ValueTable {
  Vector v;
  Matrix q;
  std::size_t objective_index = 0;
};

struct VisitationDistribution {
  Vector nu;

  /// State-action occupancy nu(s) * pi(a|s).
  Matrix state_action(const PolicyTable& policy) const;
};

/// Solves (I - gamma P_pi) V = c_pi by dense LU; Q = c + gamma P V.
ValueTable policy_evaluation_exact(const TabularCmdp& cmdp, const PolicyTable& policy,
                                   std::size_t objective_index);
ValueTable policy_evaluation_exact(const TabularCmdp& cmdp, const SoftmaxPolicy& policy,
                                   std::size_t objective_index);

/// Discounted state visitation nu = (1-gamma) rho^T (I - gamma P_pi)^{-1}.
VisitationDistribution visitation_exact(const TabularCmdp& cmdp, const PolicyTable& policy);
VisitationDistribution visitation_exact(const TabularCmdp& cmdp, const SoftmaxPolicy& policy);

/// J_i(pi) = E_rho[V_i(s)].
double expected_objective(const TabularCmdp& cmdp, const PolicyTable& policy,
                          std::size_t objective_index);
double expected_objective(const TabularCmdp& cmdp, const SoftmaxPolicy& policy,
                          std::size_t objective_index);

/// All objectives J_0..J_p at once, sharing the transition assembly.
std::vector<double> expected_objectives(const TabularCmdp& cmdp, const PolicyTable& policy);

/// Policy-induced state transition matrix P_pi(s, s').
Matrix policy_transition(const TabularCmdp& cmdp, const PolicyTable& policy);

/// Throws InvalidInput unless `policy` is a row-stochastic table matching `cmdp`.
void check_policy(const TabularCmdp& cmdp, const PolicyTable& policy, double tol = 1e-9);

// JSON serialization. Doubles are written with 17 significant digits so a
// round trip reproduces every bit.
std::string to_json(const TabularCmdp& cmdp);
TabularCmdp cmdp_from_json(const std::string& text);
void save_cmdp(const TabularCmdp& cmdp, const std::string& path);
TabularCmdp load_cmdp(const std::string& path);

}  // namespace metasrl
