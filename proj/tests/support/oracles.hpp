#pragma once

// Reference computations used only by tests. Everything here is written
// independently of the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "metasrl/cmdp.hpp"
#include "metasrl/dataset.hpp"
#include "metasrl/rng.hpp"

namespace oracle {

using metasrl::Matrix;
using metasrl::PolicyTable;
using metasrl::Rng;
using metasrl::TabularCmdp;
using metasrl::Vector;

inline PolicyTable random_policy(Rng& rng, std::size_t ns, std::size_t na) {
  PolicyTable pi(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(na));
  for (Eigen::Index s = 0; s < pi.rows(); ++s) pi.row(s) = rng.dirichlet(na).transpose();
  return pi;
}

// Limits are set to J_i of a random reference policy plus `slack`, so the
// instance is strictly feasible whenever slack > 0.
inline TabularCmdp random_cmdp(Rng& rng, std::size_t ns, std::size_t na, std::size_t p, double gamma,
                               double slack = 0.05) {
  const auto S = static_cast<Eigen::Index>(ns);
  const auto A = static_cast<Eigen::Index>(na);
  Matrix transition(S * A, S);
  for (Eigen::Index r = 0; r < S * A; ++r) transition.row(r) = rng.dirichlet(ns).transpose();
  auto table = [&] {
    Matrix m(S, A);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform01();
    return m;
  };
  Matrix reward = table();
  std::vector<Matrix> costs;
  for (std::size_t i = 0; i < p; ++i) costs.push_back(table());
  Vector rho = rng.dirichlet(ns);
  std::vector<double> limits(p, 0.0);
  TabularCmdp probe(ns, na, transition, reward, costs, limits, gamma, rho, 1.0);
  const PolicyTable ref = random_policy(rng, ns, na);
  for (std::size_t i = 0; i < p; ++i) limits[i] = metasrl::expected_objective(probe, ref, i + 1) + slack;
  return TabularCmdp(ns, na, std::move(transition), std::move(reward), std::move(costs), std::move(limits),
                     gamma, std::move(rho), 1.0);
}

// Optimal J_0 of the unconstrained problem by value iteration to tolerance `tol`.
inline double value_iteration_j0(const TabularCmdp& m, double tol = 1e-12) {
  const auto S = static_cast<Eigen::Index>(m.n_states());
  const auto A = static_cast<Eigen::Index>(m.n_actions());
  Vector v = Vector::Zero(S);
  for (int it = 0; it < 100000; ++it) {
    Vector next(S);
    for (Eigen::Index s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < A; ++a)
        best = std::max(best, m.reward()(s, a) + m.discount() * m.transition().row(s * A + a).dot(v));
      next(s) = best;
    }
    const double diff = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (diff * m.discount() / (1.0 - m.discount()) < tol) break;
  }
  return m.initial_dist().dot(v);
}

// Iterative policy evaluation, independent of the LU solve.
inline Vector iterative_values(const TabularCmdp& m, const PolicyTable& pi, std::size_t objective,
                               double tol = 1e-13) {
  const auto S = static_cast<Eigen::Index>(m.n_states());
  const auto A = static_cast<Eigen::Index>(m.n_actions());
  const Matrix& c = m.objective(objective);
  Vector v = Vector::Zero(S);
  for (int it = 0; it < 200000; ++it) {
    Vector next = Vector::Zero(S);
    for (Eigen::Index s = 0; s < S; ++s)
      for (Eigen::Index a = 0; a < A; ++a)
        next(s) += pi(s, a) * (c(s, a) + m.discount() * m.transition().row(s * A + a).dot(v));
    const double diff = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (diff < tol) break;
  }
  return v;
}

// Monte Carlo discounted visitation: run the chain for a Geometric(1-gamma)
// number of steps and record where it stops.
inline Vector mc_visitation(const TabularCmdp& m, const PolicyTable& pi, std::size_t samples, Rng& rng) {
  const auto A = static_cast<Eigen::Index>(m.n_actions());
  Vector counts = Vector::Zero(static_cast<Eigen::Index>(m.n_states()));
  for (std::size_t k = 0; k < samples; ++k) {
    auto s = static_cast<Eigen::Index>(rng.categorical(m.initial_dist()));
    while (rng.uniform01() < m.discount()) {
      const auto a = static_cast<Eigen::Index>(rng.categorical(pi.row(s)));
      s = static_cast<Eigen::Index>(rng.categorical(m.transition().row(s * A + a)));
    }
    counts(s) += 1.0;
  }
  return counts / static_cast<double>(samples);
}

inline double total_variation(const Vector& p, const Vector& q) { return 0.5 * (p - q).cwiseAbs().sum(); }

// Central differences of a scalar function of a matrix argument.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix up = x;
    Matrix down = x;
    up(i) += h;
    down(i) -= h;
    g(i) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// argmin over {phi >= rho, sum phi = 1} of -sum m_a log phi_a, by bisection on
// the multiplier of phi_a = max(rho, m_a / lambda).
inline Vector kl_center_bisection(const Vector& m, double rho) {
  auto mass = [&](double lambda) { return (m.array() / lambda).max(rho).sum(); };
  double lo = 1e-300;
  double hi = m.sum() / (1.0 - rho * static_cast<double>(m.size())) + 1.0;
  lo = std::max(lo, m.maxCoeff() * 1e-12);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  Vector phi = (m.array() / hi).max(rho);
  return phi / phi.sum();
}

// Euclidean projection onto {x >= rho, sum x = 1} by bisection on the shift.
inline Vector projection_bisection(const Vector& v, double rho) {
  auto mass = [&](double tau) { return (v.array() - tau).max(rho).sum(); };
  double lo = v.minCoeff() - 2.0;
  double hi = v.maxCoeff() + 1.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(rho);
}

// Minimizer of a unimodal function on [lo, hi] via a log-spaced scan followed by
// golden-section refinement around the best grid point.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, int grid = 2000) {
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double v = f(std::exp(llo + (lhi - llo) * i / grid));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::exp(llo + (lhi - llo) * std::max(best - 1, 0) / grid);
  double b = std::exp(llo + (lhi - llo) * std::min(best + 1, grid) / grid);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

// Exact-expectation dataset: every (s,a) with weight d(s,a) and every next
// state with its transition probability, plus the true initial distribution.
inline void fill_exact_dataset(const TabularCmdp& m, const Matrix& d, metasrl::TrajectoryDataset& out) {
  const auto S = static_cast<Eigen::Index>(m.n_states());
  const auto A = static_cast<Eigen::Index>(m.n_actions());
  for (Eigen::Index s = 0; s < S; ++s)
    for (Eigen::Index a = 0; a < A; ++a) {
      if (d(s, a) <= 0.0) continue;
      for (Eigen::Index n = 0; n < S; ++n) {
        const double p = m.transition()(s * A + a, n);
        if (p <= 0.0) continue;
        metasrl::Transition tr;
        tr.s = static_cast<std::size_t>(s);
        tr.a = static_cast<std::size_t>(a);
        tr.s_next = static_cast<std::size_t>(n);
        tr.signals.assign(m.num_objectives(), 0.0);
        tr.weight = d(s, a) * p;
        out.add_transition(std::move(tr));
      }
    }
  for (Eigen::Index s = 0; s < S; ++s)
    if (m.initial_dist()(s) > 0.0) out.add_initial_state(static_cast<std::size_t>(s), m.initial_dist()(s));
}

}  // namespace oracle
