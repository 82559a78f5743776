#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "metasrl/cmdp.hpp"

namespace metasrl {

/// Per-task constants of the within-task bound, as functions of (gamma, c_max, |S|, |A|).
struct SimConstants {
  double c1 = 2.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
};

/// `gap_fraction` is the fraction in (0, 1/2) bounding the share of
/// constraint steps; zero reproduces the plain constant.
SimConstants make_sim_constants(double discount, double c_max, std::size_t n_states,
                                std::size_t n_actions, double gap_fraction = 0.0);

struct MetaRecord {
  Vector nu_hat;
  PolicyTable pi_hat;
  PolicyTable phi_used;
  double kl_term = 0.0;
  double kappa_used = 0.0;
  std::size_t steps = 0;
};

struct MetaHyperparameters {
  double shrinkage = 1e-3;
  double rate_floor = 1e-4;
  /// Non-positive means rate_floor / 10.
  double beta_sim = 0.0;
  /// Non-positive means 1/sqrt(horizon), or a doubling schedule if horizon is 0.
  double beta_init = 0.0;
  std::size_t horizon = 0;
  std::size_t inner_updates = 1;
};

class MetaLearnerState {
 public:
  MetaLearnerState(PolicyTable phi, double kappa, const MetaHyperparameters& hp);

  /// Uniform initialization with the given learning rate.
  static MetaLearnerState uniform(std::size_t n_states, std::size_t n_actions, double kappa,
                                  const MetaHyperparameters& hp);

  const PolicyTable& phi() const { return phi_; }
  double kappa() const { return kappa_; }
  double shrinkage() const { return shrinkage_; }
  double rate_floor() const { return rate_floor_; }
  double beta_sim() const { return beta_sim_; }
  std::size_t inner_updates() const { return inner_updates_; }
  const std::vector<MetaRecord>& history() const { return history_; }

  /// Step size used for the init track on the next update.
  double beta_init() const;

  friend MetaLearnerState meta_update(const MetaLearnerState&, const VisitationDistribution&,
                                      const PolicyTable&, std::size_t, const SimConstants&);

 private:
  PolicyTable phi_;
  double kappa_;
  double shrinkage_;
  double rate_floor_;
  double beta_sim_;
  double beta_init_fixed_;
  std::size_t horizon_;
  std::size_t inner_updates_;
  std::vector<MetaRecord> history_;
};

/// Loss of the rate track and its derivative in kappa.
std::pair<double, double> sim_loss_and_grad(double kappa, double kl_term, std::size_t steps,
                                            const SimConstants& constants);

/// One meta step after a finished task: K projected steps on the init track and
/// one projected step on the rate track.
MetaLearnerState meta_update(const MetaLearnerState& state, const VisitationDistribution& nu_hat,
                             const PolicyTable& pi_hat, std::size_t steps,
                             const SimConstants& constants);
MetaLearnerState meta_update(const MetaLearnerState& state, const VisitationDistribution& nu_hat,
                             const SoftmaxPolicy& pi_hat, std::size_t steps,
                             const SimConstants& constants);

struct SimilarityCenter {
  PolicyTable phi;
  double d_hat_sq = 0.0;
};

/// Minimizer of (1/T) sum_t E_{nu_t}[KL(pi_t || phi)] over the shrinkage simplex,
/// together with the minimum value. Rows never visited are uniform.
SimilarityCenter closed_form_similarity_center(
    const std::vector<std::pair<Vector, PolicyTable>>& history, double shrinkage);

/// argmin over the shrinkage simplex of -sum_a m_a ln phi_a for a probability vector m.
Vector kl_center_row(const Vector& m, double shrinkage);

/// Ingredients of the hindsight bound L(kappa) on the summed per-task bounds.
struct RateBoundInputs {
  double u_sim = 0.0;
  double u_init = 0.0;
  double inexactness = 0.0;
  double v_hat_sq = 0.0;
  std::size_t num_tasks = 1;
  std::size_t steps = 1;
  SimConstants constants;
  /// Multiplicity of the rate term: 1 matches the closed form below,
  /// num_tasks sums one rate term per task.
  double rate_terms = 1.0;
};

double rate_bound(double kappa, const RateBoundInputs& in);
double optimal_kappa(const RateBoundInputs& in);

}  // namespace metasrl
