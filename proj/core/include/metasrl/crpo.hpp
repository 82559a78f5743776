#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "metasrl/cmdp.hpp"
#include "metasrl/dataset.hpp"
#include "metasrl/error.hpp"
#include "metasrl/sampler.hpp"

namespace metasrl {

enum class CriticMode { Exact, TdSampled };
enum class Direction { Ascent, Descent };

struct CrpoConfig {
  double learning_rate = 0.1;
  std::size_t steps = 100;
  double tolerance = 0.0;
  CriticMode critic_mode = CriticMode::Exact;
  std::size_t td_iterations = 2000;
  /// Base TD step; the n-th update of a pair uses td_step_size / (1 + td_step_size (1-gamma) n).
  double td_step_size = 1.0;
  std::size_t episodes_per_step = 5;
  std::size_t episode_horizon = 50;
  std::uint64_t rng_seed = 0;
  /// Keep every iterate; otherwise only the reward-step snapshots are kept.
  bool keep_all_iterates = true;
  /// Rows of the initial policy must have every entry >= shrinkage - 1e-12.
  double shrinkage = 0.0;

  void validate() const;
};

struct CrpoOutcome {
  SoftmaxPolicy returned_policy = SoftmaxPolicy::uniform(1, 1);
  std::size_t returned_step = 0;
  std::vector<std::size_t> reward_steps;
  /// constraint_steps[i-1] lists the steps that descended on cost i.
  std::vector<std::vector<std::size_t>> constraint_steps;
  TrajectoryDataset dataset{1, 1};
  /// per_step_estimates[m][i] = estimated J_i at step m, i = 0..p.
  std::vector<std::vector<double>> per_step_estimates;
  /// Policy used at step m (all M of them when kept).
  std::vector<SoftmaxPolicy> all_iterates;
  /// Snapshots aligned with reward_steps.
  std::vector<SoftmaxPolicy> reward_snapshots;
  double tolerance = 0.0;
};

/// No step passed the gate, so no output policy is defined.
class DegenerateRun : public Error {
 public:
  DegenerateRun(const std::string& what, CrpoOutcome partial)
      : Error(what), partial_(std::move(partial)) {}
  /// The run with returned_policy set to the last iterate.
  const CrpoOutcome& partial() const noexcept { return partial_; }
  const SoftmaxPolicy& last_iterate() const noexcept { return partial_.returned_policy; }

 private:
  CrpoOutcome partial_;
};

/// Critic for one objective. Exact mode needs a sampler with a model.
ValueTable td_critic(const StepSampler& env, const SoftmaxPolicy& policy,
                     std::size_t objective_index, const CrpoConfig& config, Rng& rng);

/// Runs the sampled TD critic on all objectives at once over one chain.
std::vector<ValueTable> td_critic_all(const StepSampler& env, const PolicyTable& policy,
                                      const CrpoConfig& config, Rng& rng);

/// theta +- alpha / (1 - gamma) * Q.
Matrix npg_softmax_step(const Matrix& logits, const ValueTable& q_estimate, double alpha,
                        Direction direction, double discount);

/// Violation tolerance with the sampled-critic terms.
double compute_eta(std::size_t n_states, std::size_t n_actions, double alpha, std::size_t steps,
                   double kl_bound, double discount, double c_max, std::size_t num_constraints);

/// Tolerance for an exact critic: 2 KL / (alpha M) + 4 alpha c_max^2 |S||A| / (1-gamma)^3.
/// This is also the per-task bound on both the optimality gap and the violation.
double exact_critic_eta(std::size_t n_states, std::size_t n_actions, double alpha,
                        std::size_t steps, double kl_bound, double discount, double c_max);

CrpoOutcome run_crpo(const TabularCmdp& cmdp, const SoftmaxPolicy& init_policy,
                     const CrpoConfig& config);

/// Same as above with an explicit environment; Exact mode requires env.model().
CrpoOutcome run_crpo(const StepSampler& env, const std::vector<double>& limits,
                     const SoftmaxPolicy& init_policy, const CrpoConfig& config);

/// JSON export of the outcome (policies, index sets, per-step estimates).
std::string to_json(const CrpoOutcome& outcome);

}  // namespace metasrl
