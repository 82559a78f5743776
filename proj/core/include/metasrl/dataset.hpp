#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metasrl/cmdp.hpp"
#include "metasrl/rng.hpp"
#include "metasrl/sampler.hpp"

namespace metasrl {

struct Transition {
  std::size_t step = 0;
  std::size_t episode = 0;
  std::size_t t = 0;
  std::size_t s = 0;
  std::size_t a = 0;
  std::size_t s_next = 0;
  /// Reward followed by the p costs.
  std::vector<double> signals;
  bool initial = false;
  double weight = 1.0;
};

struct InitialState {
  std::size_t s = 0;
  double weight = 1.0;
};

/// Off-policy transitions plus initial-state samples. Weights default to one;
/// weighted entries let tests build exact-expectation datasets.
class TrajectoryDataset {
 public:
  TrajectoryDataset(std::size_t n_states, std::size_t n_actions, std::size_t num_costs = 0);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t num_costs() const { return num_costs_; }

  void add_transition(Transition tr);
  void add_initial_state(std::size_t s, double weight = 1.0);

  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<InitialState>& initial_states() const { return initial_states_; }
  bool empty() const { return transitions_.empty(); }

  /// Empirical d^D(s,a), normalized to sum to one.
  Matrix counts() const;
  /// Empirical initial-state distribution.
  Vector initial_distribution() const;

  /// CSV with columns step,episode,t,s,a,r,c_1..c_p,s_next,s0_flag.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::size_t num_costs_;
  std::vector<Transition> transitions_;
  std::vector<InitialState> initial_states_;
};

/// Rolls out `episodes` episodes of length `horizon` from the sampler's
/// initial distribution and appends them (and their start states) to `out`.
/// Returns the empirical start-state distribution of these episodes.
Vector rollout_episodes(const StepSampler& env, const PolicyTable& policy, std::size_t episodes,
                        std::size_t horizon, std::size_t step_index, Rng& rng,
                        TrajectoryDataset& out);

}  // namespace metasrl
