#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "metasrl/cmdp.hpp"
#include "metasrl/dataset.hpp"

namespace metasrl {

enum class DiceSolver { DirectSolve, Sgd };

struct DiceConfig {
  DiceSolver solver = DiceSolver::DirectSolve;
  std::size_t sgd_steps = 10000;
  double sgd_step_size = 0.05;
  std::uint64_t rng_seed = 0;
};

struct CorrectionTable {
  /// omega(s,a) >= 0, zero on uncovered pairs.
  Matrix omega;
  /// 1 where d^D(s,a) > 0.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> coverage_mask;
  /// Set when the normal equations were rank deficient.
  bool coverage_warning = false;
  /// sum omega * d^D; close to one for a good fit.
  double normalization = 0.0;
  /// Residual of the normal equations (DirectSolve) or zero.
  double residual = 0.0;

  std::string to_csv() const;
};

/// Tabular DualDICE. DirectSolve minimizes the empirical quadratic exactly
/// using the empirical conditional next-state law of each covered pair; Sgd
/// runs stochastic descent-ascent on the saddle-point form.
CorrectionTable dualdice_fit(const TrajectoryDataset& dataset, const PolicyTable& target_policy,
                             double discount, const DiceConfig& config = {});
CorrectionTable dualdice_fit(const TrajectoryDataset& dataset, const SoftmaxPolicy& target_policy,
                             double discount, const DiceConfig& config = {});

/// nu_hat(s) proportional to sum_a omega(s,a) d^D(s,a).
VisitationDistribution visitation_from_corrections(const TrajectoryDataset& dataset,
                                                   const CorrectionTable& corrections);

/// E_{nu_hat}[KL(pi_hat || phi)] and its gradient in phi's probability coordinates.
std::pair<double, Matrix> kl_loss_and_grad(const VisitationDistribution& nu_hat,
                                           const PolicyTable& pi_hat, const PolicyTable& phi);
std::pair<double, Matrix> kl_loss_and_grad(const VisitationDistribution& nu_hat,
                                           const SoftmaxPolicy& pi_hat, const SoftmaxPolicy& phi);

/// The three-way split of the plug-in KL error for a reference table phi.
struct ErrorDecomposition {
  double total = 0.0;
  double visitation_mismatch = 0.0;  // (A): nu* vs nu_tilde under pi*
  double estimation = 0.0;           // (B): nu_tilde vs nu_hat under pi*
  double policy_mismatch = 0.0;      // (C): pi* vs pi_hat under nu_hat
};

ErrorDecomposition decompose_kl_error(const Vector& nu_star, const PolicyTable& pi_star,
                                      const Vector& nu_tilde, const Vector& nu_hat,
                                      const PolicyTable& pi_hat, const PolicyTable& phi);

}  // namespace metasrl
