#include "metasrl/cmdp.hpp"

#include <cmath>
#include <string>

#include "metasrl/error.hpp"

namespace metasrl {
namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kResidualTol = 1e-10;

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_distribution(const Eigen::Ref<const Vector>& p, const std::string& what) {
  if (!p.allFinite() || (p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > kStochasticTol)
    throw InvalidInput(what + " is not a probability vector");
}

void check_table(const Matrix& table, std::size_t rows, std::size_t cols, double c_max,
                 const std::string& what) {
  if (table.rows() != static_cast<Eigen::Index>(rows) ||
      table.cols() != static_cast<Eigen::Index>(cols))
    throw InvalidInput(what + " has wrong dimensions");
  if (!all_finite(table) || table.minCoeff() < 0.0 || table.maxCoeff() > c_max)
    throw InvalidInput(what + " has entries outside [0, c_max]");
}

Vector policy_average(const Matrix& table, const PolicyTable& policy) {
  return table.cwiseProduct(policy).rowwise().sum();
}

// Solves (I - gamma A) x = b and verifies the scaled residual.
Vector solve_resolvent(const Matrix& a, double discount, const Vector& b) {
  const Eigen::Index n = a.rows();
  Matrix lhs = Matrix::Identity(n, n) - discount * a;
  Eigen::PartialPivLU<Matrix> lu(lhs);
  Vector x = lu.solve(b);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff() + x.cwiseAbs().maxCoeff();
  const double residual = (lhs * x - b).cwiseAbs().maxCoeff();
  if (!x.allFinite() || residual > kResidualTol * scale)
    throw NumericalFailure("policy linear system residual " + std::to_string(residual));
  return x;
}

}  // namespace

TabularCmdp::TabularCmdp(std::size_t n_states, std::size_t n_actions, Matrix transition,
                         Matrix reward, std::vector<Matrix> costs, std::vector<double> limits,
                         double discount, Vector initial_dist, double c_max)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      costs_(std::move(costs)),
      limits_(std::move(limits)),
      discount_(discount),
      initial_dist_(std::move(initial_dist)),
      c_max_(c_max) {
  if (n_states_ == 0 || n_actions_ == 0) throw InvalidInput("cmdp needs states and actions");
  if (!(discount_ > 0.0 && discount_ < 1.0)) throw InvalidInput("discount must lie in (0,1)");
  if (!(c_max_ > 0.0) || !std::isfinite(c_max_)) throw InvalidInput("c_max must be positive");
  const auto sa = static_cast<Eigen::Index>(n_states_ * n_actions_);
  if (transition_.rows() != sa || transition_.cols() != static_cast<Eigen::Index>(n_states_))
    throw InvalidInput("transition has wrong dimensions");
  for (Eigen::Index r = 0; r < sa; ++r) check_distribution(transition_.row(r).transpose(),
                                                           "transition row " + std::to_string(r));
  if (initial_dist_.size() != static_cast<Eigen::Index>(n_states_))
    throw InvalidInput("initial_dist has wrong dimension");
  check_distribution(initial_dist_, "initial_dist");
  check_table(reward_, n_states_, n_actions_, c_max_, "reward");
  for (std::size_t i = 0; i < costs_.size(); ++i)
    check_table(costs_[i], n_states_, n_actions_, c_max_, "cost " + std::to_string(i + 1));
  if (limits_.size() != costs_.size()) throw InvalidInput("one limit per cost is required");
  for (double d : limits_)
    if (std::isnan(d)) throw InvalidInput("limit is NaN");
}

const Matrix& TabularCmdp::objective(std::size_t index) const {
  if (index == 0) return reward_;
  if (index > costs_.size()) throw InvalidInput("objective index out of range");
  return costs_[index - 1];
}

double TabularCmdp::limit(std::size_t constraint_index) const {
  if (constraint_index == 0 || constraint_index > limits_.size())
    throw InvalidInput("constraint index out of range");
  return limits_[constraint_index - 1];
}

double TabularCmdp::unconstrained_limit() const {
  return metasrl::unconstrained_limit(c_max_, discount_);
}

double unconstrained_limit(double c_max, double discount) {
  return c_max / (1.0 - discount) + 1.0;
}

SoftmaxPolicy SoftmaxPolicy::from_logits(Matrix logits) {
  if (logits.rows() == 0 || logits.cols() == 0) throw InvalidInput("empty logits");
  if (!logits.allFinite()) throw InvalidInput("non-finite logits");
  PolicyTable probs(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    const double top = logits.row(s).maxCoeff();
    auto e = (logits.row(s).array() - top).exp();
    probs.row(s) = e / e.sum();
  }
  return SoftmaxPolicy(std::move(logits), std::move(probs));
}

SoftmaxPolicy SoftmaxPolicy::from_probabilities(const PolicyTable& probs) {
  if (probs.size() == 0) throw InvalidInput("empty policy table");
  if (!probs.allFinite() || (probs.array() <= 0.0).any())
    throw InvalidInput("softmax policy needs strictly positive probabilities");
  return from_logits(probs.array().log().matrix());
}

SoftmaxPolicy SoftmaxPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
  return from_logits(Matrix::Zero(static_cast<Eigen::Index>(n_states),
                                  static_cast<Eigen::Index>(n_actions)));
}

SoftmaxPolicy policy_from_logits(const Matrix& logits) { return SoftmaxPolicy::from_logits(logits); }

Matrix VisitationDistribution::state_action(const PolicyTable& policy) const {
  if (policy.rows() != nu.size()) throw InvalidInput("policy does not match visitation");
  return policy.array().colwise() * nu.array();
}

void check_policy(const TabularCmdp& cmdp, const PolicyTable& policy, double tol) {
  if (policy.rows() != static_cast<Eigen::Index>(cmdp.n_states()) ||
      policy.cols() != static_cast<Eigen::Index>(cmdp.n_actions()))
    throw InvalidInput("policy dimensions do not match cmdp");
  if (!policy.allFinite() || (policy.array() < -tol).any())
    throw InvalidInput("policy has negative or non-finite entries");
  for (Eigen::Index s = 0; s < policy.rows(); ++s)
    if (std::abs(policy.row(s).sum() - 1.0) > tol)
      throw InvalidInput("policy row " + std::to_string(s) + " does not sum to 1");
}

Matrix policy_transition(const TabularCmdp& cmdp, const PolicyTable& policy) {
  check_policy(cmdp, policy);
  const auto ns = static_cast<Eigen::Index>(cmdp.n_states());
  const auto na = static_cast<Eigen::Index>(cmdp.n_actions());
  Matrix p_pi = Matrix::Zero(ns, ns);
  for (Eigen::Index s = 0; s < ns; ++s)
    for (Eigen::Index a = 0; a < na; ++a)
      p_pi.row(s) += policy(s, a) * cmdp.transition().row(s * na + a);
  return p_pi;
}

ValueTable policy_evaluation_exact(const TabularCmdp& cmdp, const PolicyTable& policy,
                                   std::size_t objective_index) {
  const Matrix& c = cmdp.objective(objective_index);
  const Matrix p_pi = policy_transition(cmdp, policy);
  ValueTable out;
  out.objective_index = objective_index;
  out.v = solve_resolvent(p_pi, cmdp.discount(), policy_average(c, policy));
  const Vector next = cmdp.transition() * out.v;
  out.q = c + cmdp.discount() * next.reshaped(c.cols(), c.rows()).transpose();
  return out;
}

ValueTable policy_evaluation_exact(const TabularCmdp& cmdp, const SoftmaxPolicy& policy,
                                   std::size_t objective_index) {
  return policy_evaluation_exact(cmdp, policy.probs(), objective_index);
}

VisitationDistribution visitation_exact(const TabularCmdp& cmdp, const PolicyTable& policy) {
  const Matrix p_pi = policy_transition(cmdp, policy);
  const double g = cmdp.discount();
  Vector nu = solve_resolvent(p_pi.transpose(), g, (1.0 - g) * cmdp.initial_dist());
  nu = nu.cwiseMax(0.0);
  nu /= nu.sum();
  return {std::move(nu)};
}

VisitationDistribution visitation_exact(const TabularCmdp& cmdp, const SoftmaxPolicy& policy) {
  return visitation_exact(cmdp, policy.probs());
}

double expected_objective(const TabularCmdp& cmdp, const PolicyTable& policy,
                          std::size_t objective_index) {
  return cmdp.initial_dist().dot(policy_evaluation_exact(cmdp, policy, objective_index).v);
}

double expected_objective(const TabularCmdp& cmdp, const SoftmaxPolicy& policy,
                          std::size_t objective_index) {
  return expected_objective(cmdp, policy.probs(), objective_index);
}

std::vector<double> expected_objectives(const TabularCmdp& cmdp, const PolicyTable& policy) {
  const Matrix p_pi = policy_transition(cmdp, policy);
  const auto ns = static_cast<Eigen::Index>(cmdp.n_states());
  Matrix rhs(ns, static_cast<Eigen::Index>(cmdp.num_objectives()));
  for (std::size_t i = 0; i < cmdp.num_objectives(); ++i)
    rhs.col(static_cast<Eigen::Index>(i)) = policy_average(cmdp.objective(i), policy);
  Matrix lhs = Matrix::Identity(ns, ns) - cmdp.discount() * p_pi;
  Matrix v = Eigen::PartialPivLU<Matrix>(lhs).solve(rhs);
  const double residual = (lhs * v - rhs).cwiseAbs().maxCoeff();
  if (!v.allFinite() || residual > kResidualTol * (1.0 + v.cwiseAbs().maxCoeff()))
    throw NumericalFailure("policy linear system residual " + std::to_string(residual));
  std::vector<double> out(cmdp.num_objectives());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cmdp.initial_dist().dot(v.col(static_cast<Eigen::Index>(i)));
  return out;
}

}  // namespace metasrl
