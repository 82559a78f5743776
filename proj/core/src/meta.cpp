#include "metasrl/meta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "metasrl/dice.hpp"
#include "metasrl/divergence.hpp"
#include "metasrl/error.hpp"
#include "metasrl/ogd.hpp"
#include "metasrl/projection.hpp"

namespace metasrl {

SimConstants make_sim_constants(double discount, double c_max, std::size_t n_states,
                                std::size_t n_actions, double gap_fraction) {
  if (!(discount > 0.0 && discount < 1.0)) throw InvalidInput("sim constants: discount in (0,1)");
  if (!(c_max > 0.0)) throw InvalidInput("sim constants: c_max must be positive");
  if (!(gap_fraction >= 0.0 && gap_fraction < 0.5))
    throw InvalidInput("sim constants: gap fraction must lie in [0, 1/2)");
  const double h = 1.0 - discount;
  const double sa = static_cast<double>(n_states * n_actions);
  SimConstants c;
  c.c1 = 2.0;
  c.c2 = 4.0 * c_max * c_max * sa / (h * h * h);
  c.c3 = (3.0 + h * h) / (h * h);
  c.c4 = 3.0 * c_max / (h * h);
  c.c5 = 2.0 * std::sqrt(h * sa) / (1.0 - 2.0 * gap_fraction);
  return c;
}

MetaLearnerState::MetaLearnerState(PolicyTable phi, double kappa, const MetaHyperparameters& hp)
    : phi_(std::move(phi)),
      kappa_(kappa),
      shrinkage_(hp.shrinkage),
      rate_floor_(hp.rate_floor),
      beta_sim_(hp.beta_sim > 0.0 ? hp.beta_sim : hp.rate_floor / 10.0),
      beta_init_fixed_(hp.beta_init),
      horizon_(hp.horizon),
      inner_updates_(hp.inner_updates) {
  if (!(rate_floor_ > 0.0)) throw InvalidInput("meta: rate floor must be positive");
  if (!(shrinkage_ >= 0.0) || shrinkage_ * static_cast<double>(phi_.cols()) >= 1.0)
    throw InvalidInput("meta: shrinkage must satisfy 0 <= rho < 1/|A|");
  if (inner_updates_ == 0) throw InvalidInput("meta: inner_updates must be at least 1");
  if (!(kappa_ >= rate_floor_)) throw InvalidInput("meta: learning rate below its floor");
  if (!in_shrinkage_simplex(phi_, shrinkage_))
    throw InvalidInput("meta: initialization leaves the shrinkage simplex");
}

MetaLearnerState MetaLearnerState::uniform(std::size_t n_states, std::size_t n_actions,
                                           double kappa, const MetaHyperparameters& hp) {
  const auto na = static_cast<Eigen::Index>(n_actions);
  return MetaLearnerState(
      PolicyTable::Constant(static_cast<Eigen::Index>(n_states), na, 1.0 / static_cast<double>(na)),
      kappa, hp);
}

double MetaLearnerState::beta_init() const {
  if (beta_init_fixed_ > 0.0) return beta_init_fixed_;
  if (horizon_ > 0) return 1.0 / std::sqrt(static_cast<double>(horizon_));
  // Doubling schedule: epoch k covers rounds [2^k, 2^{k+1}) and uses 1/sqrt(2^k).
  const std::size_t round = history_.size() + 1;
  std::size_t epoch = 1;
  while (epoch * 2 <= round) epoch *= 2;
  return 1.0 / std::sqrt(static_cast<double>(epoch));
}

std::pair<double, double> sim_loss_and_grad(double kappa, double kl_term, std::size_t steps,
                                            const SimConstants& c) {
  if (!(kappa > 0.0)) throw InvalidInput("sim loss: kappa must be positive");
  if (!(kl_term >= 0.0)) throw InvalidInput("sim loss: kl term must be nonnegative");
  const double m = static_cast<double>(steps);
  const double root = std::sqrt(m);
  const double slope = c.c2 * m + c.c4 * root;
  const double loss = c.c1 * kl_term / kappa + kappa * slope + c.c3 * root;
  const double grad = -c.c1 * kl_term / (kappa * kappa) + slope;
  return {loss, grad};
}

MetaLearnerState meta_update(const MetaLearnerState& state, const VisitationDistribution& nu_hat,
                             const PolicyTable& pi_hat, std::size_t steps,
                             const SimConstants& constants) {
  const PolicyTable& phi = state.phi();
  if (pi_hat.rows() != phi.rows() || pi_hat.cols() != phi.cols() || nu_hat.nu.size() != phi.rows())
    throw InvalidInput("meta_update: task output does not match the initialization");

  const double kl_term = kl_loss_and_grad(nu_hat, pi_hat, phi).first;
  const double beta = state.beta_init();
  const Projector project = shrinkage_simplex_projector(state.shrinkage());
  const GradientOracle grad = [&](const Matrix& x) { return kl_loss_and_grad(nu_hat, pi_hat, x).second; };

  MetaLearnerState next = state;
  next.phi_ = inexact_multi_ogd(phi, grad, beta, state.inner_updates(), project);
  const double kappa_grad = sim_loss_and_grad(state.kappa(), kl_term, steps, constants).second;
  next.kappa_ = std::max(state.rate_floor(), state.kappa() - state.beta_sim() * kappa_grad);
  next.history_.push_back({nu_hat.nu, pi_hat, phi, kl_term, state.kappa(), steps});
  return next;
}

MetaLearnerState meta_update(const MetaLearnerState& state, const VisitationDistribution& nu_hat,
                             const SoftmaxPolicy& pi_hat, std::size_t steps,
                             const SimConstants& constants) {
  return meta_update(state, nu_hat, pi_hat.probs(), steps, constants);
}

Vector kl_center_row(const Vector& m, double rho) {
  const Eigen::Index n = m.size();
  if (n == 0) throw InvalidInput("kl center: empty row");
  if (!(rho >= 0.0) || rho * static_cast<double>(n) >= 1.0)
    throw InvalidInput("kl center: shrinkage must satisfy 0 <= rho < 1/n");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return m(a) > m(b); });
  // The k largest coordinates are free (phi = m / lambda); the rest sit at rho.
  double head = 0.0;
  double lambda = 0.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    head += m(order[static_cast<std::size_t>(k - 1)]);
    const double candidate = head / (1.0 - static_cast<double>(n - k) * rho);
    if (!(candidate > 0.0)) continue;
    const bool free_ok = m(order[static_cast<std::size_t>(k - 1)]) / candidate >= rho;
    const bool rest_ok = k == n || m(order[static_cast<std::size_t>(k)]) / candidate <= rho;
    if (free_ok && rest_ok) {
      lambda = candidate;
      break;
    }
  }
  if (!(lambda > 0.0)) throw NumericalFailure("kl center: no consistent active set");
  Vector out(n);
  for (Eigen::Index a = 0; a < n; ++a) out(a) = std::max(rho, m(a) / lambda);
  return out / out.sum();
}

SimilarityCenter closed_form_similarity_center(
    const std::vector<std::pair<Vector, PolicyTable>>& history, double shrinkage) {
  if (history.empty()) throw InvalidInput("similarity center: empty history");
  const Eigen::Index ns = history.front().second.rows();
  const Eigen::Index na = history.front().second.cols();
  Matrix weighted = Matrix::Zero(ns, na);
  Vector mass = Vector::Zero(ns);
  for (const auto& [nu, pi] : history) {
    if (nu.size() != ns || pi.rows() != ns || pi.cols() != na)
      throw InvalidInput("similarity center: inconsistent history shapes");
    weighted += (pi.array().colwise() * nu.array()).matrix();
    mass += nu;
  }
  SimilarityCenter out;
  out.phi = PolicyTable(ns, na);
  for (Eigen::Index s = 0; s < ns; ++s) {
    if (mass(s) > 0.0)
      out.phi.row(s) = kl_center_row((weighted.row(s) / mass(s)).transpose(), shrinkage).transpose();
    else
      out.phi.row(s).setConstant(1.0 / static_cast<double>(na));
  }
  double total = 0.0;
  for (const auto& [nu, pi] : history) total += expected_kl(nu, pi, out.phi);
  out.d_hat_sq = total / static_cast<double>(history.size());
  return out;
}

double rate_bound(double kappa, const RateBoundInputs& in) {
  if (!(kappa > 0.0)) throw InvalidInput("rate bound: kappa must be positive");
  const double m = static_cast<double>(in.steps);
  const double root = std::sqrt(m);
  const double f_rate = kappa * (in.constants.c2 * m + in.constants.c4 * root) + in.constants.c3 * root;
  const double numerator =
      in.u_init + in.inexactness + static_cast<double>(in.num_tasks) * in.v_hat_sq;
  return in.u_sim + numerator / kappa + in.rate_terms * f_rate;
}

double optimal_kappa(const RateBoundInputs& in) {
  const double m = static_cast<double>(in.steps);
  const double slope = in.rate_terms * (in.constants.c2 * m + in.constants.c4 * std::sqrt(m));
  const double numerator =
      in.u_init + in.inexactness + static_cast<double>(in.num_tasks) * in.v_hat_sq;
  if (!(slope > 0.0) || !(numerator >= 0.0)) throw InvalidInput("optimal kappa: degenerate inputs");
  return std::sqrt(numerator / slope);
}

}  // namespace metasrl
