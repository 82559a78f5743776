#include "metasrl/crpo.hpp"

#include <cmath>
#include <cstdio>

#include "metasrl/rng.hpp"

namespace metasrl {
namespace {

Matrix zero_table(const StepSampler& env) {
  return Matrix::Zero(static_cast<Eigen::Index>(env.n_states()),
                      static_cast<Eigen::Index>(env.n_actions()));
}

void append_number(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void append_table(std::string& out, const Matrix& m) {
  out += '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += r ? ",[" : "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      append_number(out, m(r, c));
    }
    out += ']';
  }
  out += ']';
}

void append_indices(std::string& out, const std::vector<std::size_t>& v) {
  out += '[';
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k]);
  }
  out += ']';
}

}  // namespace

void CrpoConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InvalidInput("crpo: learning rate must be positive");
  if (steps == 0) throw InvalidInput("crpo: steps must be at least 1");
  if (!(tolerance >= 0.0)) throw InvalidInput("crpo: tolerance must be nonnegative");
  if (critic_mode == CriticMode::TdSampled) {
    if (td_iterations == 0) throw InvalidInput("crpo: td_iterations must be positive");
    if (!(td_step_size > 0.0)) throw InvalidInput("crpo: td_step_size must be positive");
    if (episodes_per_step == 0) throw InvalidInput("crpo: sampled critic needs episodes to weight it");
  }
}

std::vector<ValueTable> td_critic_all(const StepSampler& env, const PolicyTable& policy,
                                      const CrpoConfig& config, Rng& rng) {
  const std::size_t n_obj = env.num_objectives();
  const double g = env.discount();
  std::vector<ValueTable> out(n_obj);
  for (std::size_t i = 0; i < n_obj; ++i) {
    out[i].q = zero_table(env);
    out[i].objective_index = i;
  }
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> visits =
      Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
          static_cast<Eigen::Index>(env.n_states()), static_cast<Eigen::Index>(env.n_actions()));

  std::size_t s = env.reset(rng);
  for (std::size_t k = 0; k < config.td_iterations; ++k) {
    if (s >= env.n_states()) throw EnvironmentError("sampler returned state out of range");
    const auto si = static_cast<Eigen::Index>(s);
    const std::size_t a = rng.categorical(policy.row(si));
    const auto ai = static_cast<Eigen::Index>(a);
    const std::size_t next = env.step(s, a, rng);
    if (next >= env.n_states()) throw EnvironmentError("sampler returned state out of range");
    const auto ni = static_cast<Eigen::Index>(next);
    const double n = static_cast<double>(visits(si, ai)++);
    const double lr = config.td_step_size / (1.0 + config.td_step_size * (1.0 - g) * n);
    for (std::size_t i = 0; i < n_obj; ++i) {
      Matrix& q = out[i].q;
      const double target = env.signal(i, s, a) + g * policy.row(ni).dot(q.row(ni));
      q(si, ai) += lr * (target - q(si, ai));
    }
    s = rng.uniform01() < 1.0 - g ? env.reset(rng) : next;
  }
  for (auto& vt : out) vt.v = policy.cwiseProduct(vt.q).rowwise().sum();
  return out;
}

ValueTable td_critic(const StepSampler& env, const SoftmaxPolicy& policy,
                     std::size_t objective_index, const CrpoConfig& config, Rng& rng) {
  if (objective_index >= env.num_objectives()) throw InvalidInput("td_critic: objective out of range");
  if (config.critic_mode == CriticMode::Exact) {
    const TabularCmdp* model = env.model();
    if (!model) throw InvalidInput("exact critic needs a sampler backed by a model");
    return policy_evaluation_exact(*model, policy, objective_index);
  }
  config.validate();
  return std::move(td_critic_all(env, policy.probs(), config, rng)[objective_index]);
}

Matrix npg_softmax_step(const Matrix& logits, const ValueTable& q_estimate, double alpha,
                        Direction direction, double discount) {
  if (!(alpha >= 0.0)) throw InvalidInput("npg: step size must be nonnegative");
  if (!q_estimate.q.allFinite()) throw InvalidInput("npg: non-finite Q estimate");
  if (q_estimate.q.rows() != logits.rows() || q_estimate.q.cols() != logits.cols())
    throw InvalidInput("npg: Q and logits differ in shape");
  const double scale = alpha / (1.0 - discount);
  Matrix out = direction == Direction::Ascent ? Matrix(logits + scale * q_estimate.q)
                                              : Matrix(logits - scale * q_estimate.q);
  if (!out.allFinite()) throw InvalidInput("npg: update produced non-finite logits");
  return out;
}

double compute_eta(std::size_t n_states, std::size_t n_actions, double alpha, std::size_t steps,
                   double kl_bound, double discount, double c_max, std::size_t num_constraints) {
  if (steps == 0 || !(alpha > 0.0)) throw InvalidInput("compute_eta: need M >= 1 and alpha > 0");
  const double m = static_cast<double>(steps);
  const double h = 1.0 - discount;
  const double sa = static_cast<double>(n_states * n_actions);
  return 2.0 * kl_bound / (m * alpha) + alpha * 4.0 * c_max * c_max * sa / (h * h * h) +
         static_cast<double>(num_constraints + 1) * 2.0 * (3.0 + h * h + 3.0 * alpha * c_max) /
             (std::sqrt(m) * h * h);
}

double exact_critic_eta(std::size_t n_states, std::size_t n_actions, double alpha,
                        std::size_t steps, double kl_bound, double discount, double c_max) {
  if (steps == 0 || !(alpha > 0.0)) throw InvalidInput("exact_critic_eta: need M >= 1 and alpha > 0");
  const double h = 1.0 - discount;
  const double sa = static_cast<double>(n_states * n_actions);
  return 2.0 * kl_bound / (alpha * static_cast<double>(steps)) +
         4.0 * alpha * c_max * c_max * sa / (h * h * h);
}

CrpoOutcome run_crpo(const TabularCmdp& cmdp, const SoftmaxPolicy& init_policy,
                     const CrpoConfig& config) {
  CmdpSampler env(cmdp);
  return run_crpo(env, cmdp.limits(), init_policy, config);
}

CrpoOutcome run_crpo(const StepSampler& env, const std::vector<double>& limits,
                     const SoftmaxPolicy& init_policy, const CrpoConfig& config) {
  config.validate();
  const std::size_t p = env.num_objectives() - 1;
  if (limits.size() != p) throw InvalidInput("crpo: one limit per constraint is required");
  if (init_policy.n_states() != env.n_states() || init_policy.n_actions() != env.n_actions())
    throw InvalidInput("crpo: initial policy does not match the environment");
  if (config.shrinkage > 0.0 && init_policy.probs().minCoeff() < config.shrinkage - 1e-12)
    throw InvalidInput("crpo: initial policy leaves the shrinkage simplex");
  const TabularCmdp* model = env.model();
  if (config.critic_mode == CriticMode::Exact && !model)
    throw InvalidInput("crpo: exact critic needs a sampler backed by a model");

  Rng rng(config.rng_seed);
  CrpoOutcome out;
  out.tolerance = config.tolerance;
  out.dataset = TrajectoryDataset(env.n_states(), env.n_actions(), p);
  out.constraint_steps.assign(p, {});
  out.per_step_estimates.reserve(config.steps);

  SoftmaxPolicy current = init_policy;
  for (std::size_t m = 0; m < config.steps; ++m) {
    const PolicyTable& pi = current.probs();
    const Vector starts = rollout_episodes(env, pi, config.episodes_per_step,
                                           config.episode_horizon, m, rng, out.dataset);

    std::vector<double> estimate(p + 1);
    std::vector<ValueTable> critics;
    if (config.critic_mode == CriticMode::Exact) {
      estimate = expected_objectives(*model, pi);
    } else {
      critics = td_critic_all(env, pi, config, rng);
      // Starts of this step's episodes weight the critic's state values.
      for (std::size_t i = 0; i <= p; ++i) estimate[i] = starts.dot(critics[i].v);
    }

    std::size_t chosen = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i <= p; ++i) {
      const double excess = estimate[i] - limits[i - 1] - config.tolerance;
      if (excess > 0.0 && (chosen == 0 || excess > worst)) {
        chosen = i;
        worst = excess;
      }
    }

    if (config.keep_all_iterates) out.all_iterates.push_back(current);
    if (chosen == 0) {
      out.reward_steps.push_back(m);
      out.reward_snapshots.push_back(current);
    } else {
      out.constraint_steps[chosen - 1].push_back(m);
    }
    out.per_step_estimates.push_back(std::move(estimate));

    const ValueTable q = config.critic_mode == CriticMode::Exact
                             ? policy_evaluation_exact(*model, pi, chosen)
                             : std::move(critics[chosen]);
    current = SoftmaxPolicy::from_logits(
        npg_softmax_step(current.logits(), q, config.learning_rate,
                         chosen == 0 ? Direction::Ascent : Direction::Descent, env.discount()));
  }

  if (out.reward_steps.empty()) {
    out.returned_policy = current;
    out.returned_step = config.steps;
    throw DegenerateRun("crpo: no step satisfied every constraint estimate", std::move(out));
  }
  const std::size_t pick = rng.index(out.reward_steps.size());
  out.returned_policy = out.reward_snapshots[pick];
  out.returned_step = out.reward_steps[pick];
  return out;
}

std::string to_json(const CrpoOutcome& outcome) {
  std::string out = "{\n  \"returned_step\": " + std::to_string(outcome.returned_step);
  out += ",\n  \"tolerance\": ";
  append_number(out, outcome.tolerance);
  out += ",\n  \"returned_policy\": ";
  append_table(out, outcome.returned_policy.probs());
  out += ",\n  \"reward_steps\": ";
  append_indices(out, outcome.reward_steps);
  out += ",\n  \"constraint_steps\": [";
  for (std::size_t i = 0; i < outcome.constraint_steps.size(); ++i) {
    if (i) out += ',';
    append_indices(out, outcome.constraint_steps[i]);
  }
  out += "],\n  \"per_step_estimates\": [";
  for (std::size_t m = 0; m < outcome.per_step_estimates.size(); ++m) {
    out += m ? ",[" : "[";
    const auto& row = outcome.per_step_estimates[m];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_number(out, row[i]);
    }
    out += ']';
  }
  out += "],\n  \"iterates\": [";
  for (std::size_t m = 0; m < outcome.all_iterates.size(); ++m) {
    if (m) out += ',';
    append_table(out, outcome.all_iterates[m].probs());
  }
  out += "]\n}\n";
  return out;
}

}  // namespace metasrl
