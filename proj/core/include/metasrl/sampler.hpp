#pragma once

#include <cstddef>

#include "metasrl/cmdp.hpp"
#include "metasrl/rng.hpp"

namespace metasrl {

/// Generative access to a tabular environment: initial states, next states
/// and the per-objective signal of a state-action pair.
class StepSampler {
 public:
  virtual ~StepSampler() = default;

  virtual std::size_t n_states() const = 0;
  virtual std::size_t n_actions() const = 0;
  virtual std::size_t num_objectives() const = 0;
  virtual double discount() const = 0;

  virtual std::size_t reset(Rng& rng) const = 0;
  virtual std::size_t step(std::size_t s, std::size_t a, Rng& rng) const = 0;
  virtual double signal(std::size_t objective, std::size_t s, std::size_t a) const = 0;

  /// The exact model behind the sampler, if there is one.
  virtual const TabularCmdp* model() const { return nullptr; }
};

/// Samples straight from a TabularCmdp. The CMDP must outlive the sampler.
class CmdpSampler final : public StepSampler {
 public:
  explicit CmdpSampler(const TabularCmdp& cmdp) : cmdp_(&cmdp) {}

  std::size_t n_states() const override { return cmdp_->n_states(); }
  std::size_t n_actions() const override { return cmdp_->n_actions(); }
  std::size_t num_objectives() const override { return cmdp_->num_objectives(); }
  double discount() const override { return cmdp_->discount(); }

  std::size_t reset(Rng& rng) const override { return rng.categorical(cmdp_->initial_dist()); }
  std::size_t step(std::size_t s, std::size_t a, Rng& rng) const override {
    return rng.categorical(cmdp_->transition().row(static_cast<Eigen::Index>(cmdp_->row(s, a))));
  }
  double signal(std::size_t objective, std::size_t s, std::size_t a) const override {
    return cmdp_->objective(objective)(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }
  const TabularCmdp* model() const override { return cmdp_; }

 private:
  const TabularCmdp* cmdp_;
};

}  // namespace metasrl
