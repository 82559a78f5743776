#include "metasrl/dice.hpp"

#include <cmath>
#include <cstdio>

#include "metasrl/divergence.hpp"
#include "metasrl/error.hpp"
#include "metasrl/rng.hpp"

namespace metasrl {
namespace {

using Index = Eigen::Index;

struct EmpiricalModel {
  Matrix d;               // d^D(s,a)
  Matrix next_law;        // row s*A+a: empirical P(.|s,a)
  Vector rho;             // empirical initial distribution
};

EmpiricalModel build_model(const TrajectoryDataset& data) {
  const auto ns = static_cast<Index>(data.n_states());
  const auto na = static_cast<Index>(data.n_actions());
  EmpiricalModel m;
  m.d = data.counts();
  m.next_law = Matrix::Zero(ns * na, ns);
  for (const auto& tr : data.transitions())
    m.next_law(static_cast<Index>(tr.s) * na + static_cast<Index>(tr.a),
               static_cast<Index>(tr.s_next)) += tr.weight;
  for (Index r = 0; r < m.next_law.rows(); ++r) {
    const double total = m.next_law.row(r).sum();
    if (total > 0.0) m.next_law.row(r) /= total;
  }
  m.rho = data.initial_distribution();
  return m;
}

// Row (s,a) of I - gamma * P_hat Pi, i.e. the map z -> z - B z at (s,a).
Eigen::RowVectorXd bellman_row(const EmpiricalModel& m, const PolicyTable& pi, double g, Index s,
                               Index a) {
  const Index ns = pi.rows();
  const Index na = pi.cols();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(ns * na);
  row(s * na + a) = 1.0;
  const auto law = m.next_law.row(s * na + a);
  for (Index next = 0; next < ns; ++next) {
    if (law(next) == 0.0) continue;
    for (Index b = 0; b < na; ++b) row(next * na + b) -= g * law(next) * pi(next, b);
  }
  return row;
}

Matrix corrections_from_z(const EmpiricalModel& m, const PolicyTable& pi, double g,
                          const Vector& z) {
  const Index ns = pi.rows();
  const Index na = pi.cols();
  Matrix omega = Matrix::Zero(ns, na);
  for (Index s = 0; s < ns; ++s)
    for (Index a = 0; a < na; ++a)
      if (m.d(s, a) > 0.0) omega(s, a) = std::max(0.0, bellman_row(m, pi, g, s, a).dot(z));
  return omega;
}

void check_inputs(const TrajectoryDataset& data, const PolicyTable& pi, double g) {
  if (data.empty()) throw InvalidInput("dualdice: empty dataset");
  if (data.initial_states().empty()) throw InvalidInput("dualdice: dataset has no initial states");
  if (!(g > 0.0 && g < 1.0)) throw InvalidInput("dualdice: discount must lie in (0,1)");
  if (pi.rows() != static_cast<Index>(data.n_states()) ||
      pi.cols() != static_cast<Index>(data.n_actions()))
    throw InvalidInput("dualdice: target policy does not match dataset");
}

}  // namespace

std::string CorrectionTable::to_csv() const {
  std::string out = "s,a,omega,covered\n";
  char buf[32];
  for (Index s = 0; s < omega.rows(); ++s)
    for (Index a = 0; a < omega.cols(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", omega(s, a));
      out += std::to_string(s) + ',' + std::to_string(a) + ',' + buf +
             (coverage_mask(s, a) ? ",1\n" : ",0\n");
    }
  return out;
}

CorrectionTable dualdice_fit(const TrajectoryDataset& data, const PolicyTable& pi, double g,
                             const DiceConfig& config) {
  check_inputs(data, pi, g);
  const Index ns = pi.rows();
  const Index na = pi.cols();
  const Index n = ns * na;
  const EmpiricalModel m = build_model(data);

  CorrectionTable out;
  out.coverage_mask = (m.d.array() > 0.0);
  Vector z = Vector::Zero(n);

  if (config.solver == DiceSolver::DirectSolve) {
    Matrix h = Matrix::Zero(n, n);
    Vector b = Vector::Zero(n);
    for (Index s = 0; s < ns; ++s)
      for (Index a = 0; a < na; ++a) {
        b(s * na + a) = (1.0 - g) * m.rho(s) * pi(s, a);
        if (m.d(s, a) <= 0.0) continue;
        const Eigen::RowVectorXd phi = bellman_row(m, pi, g, s, a);
        h.noalias() += m.d(s, a) * phi.transpose() * phi;
      }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(h);
    cod.setThreshold(1e-12);
    z = cod.solve(b);
    out.coverage_warning = cod.rank() < n;
    out.residual = (h * z - b).cwiseAbs().maxCoeff();
  } else {
    if (config.sgd_steps == 0) throw InvalidInput("dualdice: sgd_steps must be positive");
    if (!(config.sgd_step_size > 0.0)) throw InvalidInput("dualdice: sgd_step_size must be positive");
    Rng rng(config.rng_seed);
    Vector tr_weights(static_cast<Index>(data.transitions().size()));
    for (Index k = 0; k < tr_weights.size(); ++k)
      tr_weights(k) = data.transitions()[static_cast<std::size_t>(k)].weight;
    Vector s0_weights(static_cast<Index>(data.initial_states().size()));
    for (Index k = 0; k < s0_weights.size(); ++k)
      s0_weights(k) = data.initial_states()[static_cast<std::size_t>(k)].weight;

    Vector zeta = Vector::Zero(n);
    const double lr = config.sgd_step_size;
    for (std::size_t k = 0; k < config.sgd_steps; ++k) {
      const Transition& tr = data.transitions()[rng.categorical(tr_weights)];
      const auto s0 = static_cast<Index>(data.initial_states()[rng.categorical(s0_weights)].s);
      const Index sa = static_cast<Index>(tr.s) * na + static_cast<Index>(tr.a);
      const auto next = static_cast<Index>(tr.s_next);
      const double next_value = pi.row(next).dot(z.segment(next * na, na));
      const double delta = z(sa) - g * next_value;
      const double w = zeta(sa);
      Vector grad_z = Vector::Zero(n);
      grad_z(sa) += w;
      grad_z.segment(next * na, na) -= g * w * pi.row(next).transpose();
      grad_z.segment(s0 * na, na) -= (1.0 - g) * pi.row(s0).transpose();
      zeta(sa) += lr * (delta - w);
      z -= lr * grad_z;
    }
  }

  out.omega = corrections_from_z(m, pi, g, z);
  out.normalization = out.omega.cwiseProduct(m.d).sum();
  return out;
}

CorrectionTable dualdice_fit(const TrajectoryDataset& dataset, const SoftmaxPolicy& target_policy,
                             double discount, const DiceConfig& config) {
  return dualdice_fit(dataset, target_policy.probs(), discount, config);
}

VisitationDistribution visitation_from_corrections(const TrajectoryDataset& dataset,
                                                   const CorrectionTable& corrections) {
  const Matrix d = dataset.counts();
  if (corrections.omega.rows() != d.rows() || corrections.omega.cols() != d.cols())
    throw InvalidInput("corrections do not match dataset");
  Vector nu = corrections.omega.cwiseProduct(d).rowwise().sum();
  const double total = nu.sum();
  if (!(total > 0.0)) throw DegenerateEstimate("corrected visitation has no mass");
  return {nu / total};
}

std::pair<double, Matrix> kl_loss_and_grad(const VisitationDistribution& nu_hat,
                                           const PolicyTable& pi_hat, const PolicyTable& phi) {
  const Vector& nu = nu_hat.nu;
  if (pi_hat.rows() != nu.size() || phi.rows() != nu.size() || pi_hat.cols() != phi.cols())
    throw InvalidInput("kl loss: dimension mismatch");
  if (!phi.allFinite() || (phi.array() <= 0.0).any())
    throw InvalidInput("kl loss: reference policy must be strictly positive");
  Matrix grad = -((pi_hat.array() / phi.array()).colwise() * nu.array()).matrix();
  return {expected_kl(nu, pi_hat, phi), std::move(grad)};
}

std::pair<double, Matrix> kl_loss_and_grad(const VisitationDistribution& nu_hat,
                                           const SoftmaxPolicy& pi_hat, const SoftmaxPolicy& phi) {
  return kl_loss_and_grad(nu_hat, pi_hat.probs(), phi.probs());
}

ErrorDecomposition decompose_kl_error(const Vector& nu_star, const PolicyTable& pi_star,
                                      const Vector& nu_tilde, const Vector& nu_hat,
                                      const PolicyTable& pi_hat, const PolicyTable& phi) {
  const double star_star = expected_kl(nu_star, pi_star, phi);
  const double tilde_star = expected_kl(nu_tilde, pi_star, phi);
  const double hat_star = expected_kl(nu_hat, pi_star, phi);
  const double hat_hat = expected_kl(nu_hat, pi_hat, phi);
  ErrorDecomposition e;
  e.total = star_star - hat_hat;
  e.visitation_mismatch = star_star - tilde_star;
  e.estimation = tilde_star - hat_star;
  e.policy_mismatch = hat_star - hat_hat;
  return e;
}

}  // namespace metasrl
