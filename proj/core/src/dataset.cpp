#include "metasrl/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "metasrl/error.hpp"

namespace metasrl {

TrajectoryDataset::TrajectoryDataset(std::size_t n_states, std::size_t n_actions,
                                     std::size_t num_costs)
    : n_states_(n_states), n_actions_(n_actions), num_costs_(num_costs) {
  if (n_states == 0 || n_actions == 0) throw InvalidInput("dataset needs states and actions");
}

void TrajectoryDataset::add_transition(Transition tr) {
  if (tr.s >= n_states_ || tr.s_next >= n_states_ || tr.a >= n_actions_)
    throw InvalidInput("transition index outside dataset dimensions");
  if (!(tr.weight >= 0.0)) throw InvalidInput("transition weight must be nonnegative");
  if (tr.signals.empty()) tr.signals.assign(num_costs_ + 1, 0.0);
  if (tr.signals.size() != num_costs_ + 1) throw InvalidInput("transition signal count mismatch");
  transitions_.push_back(std::move(tr));
}

void TrajectoryDataset::add_initial_state(std::size_t s, double weight) {
  if (s >= n_states_) throw InvalidInput("initial state outside dataset dimensions");
  if (!(weight >= 0.0)) throw InvalidInput("initial-state weight must be nonnegative");
  initial_states_.push_back({s, weight});
}

Matrix TrajectoryDataset::counts() const {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(n_states_), static_cast<Eigen::Index>(n_actions_));
  for (const auto& tr : transitions_)
    d(static_cast<Eigen::Index>(tr.s), static_cast<Eigen::Index>(tr.a)) += tr.weight;
  const double total = d.sum();
  if (total > 0.0) d /= total;
  return d;
}

Vector TrajectoryDataset::initial_distribution() const {
  Vector rho = Vector::Zero(static_cast<Eigen::Index>(n_states_));
  for (const auto& s0 : initial_states_) rho(static_cast<Eigen::Index>(s0.s)) += s0.weight;
  const double total = rho.sum();
  if (total > 0.0) rho /= total;
  return rho;
}

std::string TrajectoryDataset::to_csv() const {
  std::string out = "step,episode,t,s,a,r";
  for (std::size_t i = 1; i <= num_costs_; ++i) out += ",c_" + std::to_string(i);
  out += ",s_next,s0_flag\n";
  char buf[32];
  for (const auto& tr : transitions_) {
    out += std::to_string(tr.step) + ',' + std::to_string(tr.episode) + ',' + std::to_string(tr.t) +
           ',' + std::to_string(tr.s) + ',' + std::to_string(tr.a);
    for (double x : tr.signals) {
      std::snprintf(buf, sizeof buf, ",%.17g", x);
      out += buf;
    }
    out += ',' + std::to_string(tr.s_next) + (tr.initial ? ",1\n" : ",0\n");
  }
  return out;
}

void TrajectoryDataset::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_csv();
  if (!out) throw IoError("write failed: " + path);
}

Vector rollout_episodes(const StepSampler& env, const PolicyTable& policy, std::size_t episodes,
                        std::size_t horizon, std::size_t step_index, Rng& rng,
                        TrajectoryDataset& out) {
  const std::size_t ns = env.n_states();
  const std::size_t na = env.n_actions();
  Vector starts = Vector::Zero(static_cast<Eigen::Index>(ns));
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    std::size_t s = env.reset(rng);
    if (s >= ns) throw EnvironmentError("sampler returned initial state out of range");
    starts(static_cast<Eigen::Index>(s)) += 1.0;
    out.add_initial_state(s);
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t a = rng.categorical(policy.row(static_cast<Eigen::Index>(s)));
      const std::size_t next = env.step(s, a, rng);
      if (next >= ns || a >= na) throw EnvironmentError("sampler returned state out of range");
      Transition tr;
      tr.step = step_index;
      tr.episode = ep;
      tr.t = t;
      tr.s = s;
      tr.a = a;
      tr.s_next = next;
      tr.initial = t == 0;
      tr.signals.resize(env.num_objectives());
      for (std::size_t i = 0; i < env.num_objectives(); ++i) tr.signals[i] = env.signal(i, s, a);
      out.add_transition(std::move(tr));
      s = next;
    }
  }
  if (episodes > 0) starts /= static_cast<double>(episodes);
  return starts;
}

}  // namespace metasrl
