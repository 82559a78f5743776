#include "metasrl/simplex_lp.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "metasrl/error.hpp"

namespace metasrl {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tableau-free revised simplex over the columns [A | I]; the identity block
// holds the phase-one artificials.
class RevisedSimplex {
 public:
  RevisedSimplex(const MatrixXd& a, const VectorXd& b, const LpOptions& options)
      : a_(a), b_(b), opt_(options), m_(a.rows()), n_(a.cols()) {
    basis_.resize(static_cast<std::size_t>(m_));
    in_basis_.assign(static_cast<std::size_t>(n_ + m_), -1);
    for (Index r = 0; r < m_; ++r) {
      basis_[static_cast<std::size_t>(r)] = n_ + r;
      in_basis_[static_cast<std::size_t>(n_ + r)] = r;
    }
    binv_ = MatrixXd::Identity(m_, m_);
    xb_ = b_;
  }

  VectorXd column(Index j) const {
    if (j < n_) return a_.col(j);
    VectorXd e = VectorXd::Zero(m_);
    e(j - n_) = 1.0;
    return e;
  }

  // Runs simplex to optimality for objective `cost` (length n_+m_).
  // Returns false when unbounded.
  bool optimize(const VectorXd& cost, bool allow_artificials) {
    for (;;) {
      if (iterations_ >= opt_.max_iterations)
        throw NumericalFailure("simplex iteration cap reached after " +
                                   std::to_string(iterations_) + " pivots",
                               objective(cost));
      const VectorXd y = duals(cost);
      Index entering = -1;
      const Index limit = allow_artificials ? n_ + m_ : n_;
      for (Index j = 0; j < limit; ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
        const double reduced = cost(j) - y.dot(column(j));
        if (reduced > opt_.optimality_tol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      const VectorXd u = binv_ * column(entering);
      Index leave_row = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m_; ++r) {
        if (u(r) <= opt_.pivot_tol) continue;
        const double ratio = std::max(xb_(r), 0.0) / u(r);
        const Index var = basis_[static_cast<std::size_t>(r)];
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && var < basis_[static_cast<std::size_t>(leave_row)])) {
          best = ratio;
          leave_row = r;
        }
      }
      if (leave_row < 0) return false;
      pivot(entering, leave_row, u);
    }
  }

  void pivot(Index entering, Index row, const VectorXd& u) {
    const double piv = u(row);
    const double step = xb_(row) / piv;
    xb_ -= step * u;
    xb_(row) = step;
    binv_.row(row) /= piv;
    for (Index r = 0; r < m_; ++r)
      if (r != row && u(r) != 0.0) binv_.row(r) -= u(r) * binv_.row(row);
    const Index leaving = basis_[static_cast<std::size_t>(row)];
    in_basis_[static_cast<std::size_t>(leaving)] = -1;
    basis_[static_cast<std::size_t>(row)] = entering;
    in_basis_[static_cast<std::size_t>(entering)] = row;
    ++iterations_;
    if (++since_refactor_ >= opt_.refactor_interval) refactor();
  }

  void refactor() {
    MatrixXd basis_matrix(m_, m_);
    for (Index r = 0; r < m_; ++r) basis_matrix.col(r) = column(basis_[static_cast<std::size_t>(r)]);
    Eigen::PartialPivLU<MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    since_refactor_ = 0;
  }

  // Pivots basic artificials out wherever some structural column allows it.
  void expel_artificials() {
    for (Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < n_) continue;
      for (Index j = 0; j < n_; ++j) {
        if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
        const VectorXd u = binv_ * column(j);
        if (std::abs(u(r)) > 1e-7) {
          pivot(j, r, u);
          break;
        }
      }
    }
  }

  VectorXd duals(const VectorXd& cost) const {
    VectorXd cb(m_);
    for (Index r = 0; r < m_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    return binv_.transpose() * cb;
  }

  double objective(const VectorXd& cost) const {
    double total = 0.0;
    for (Index r = 0; r < m_; ++r) total += cost(basis_[static_cast<std::size_t>(r)]) * xb_(r);
    return total;
  }

  VectorXd solution() const {
    VectorXd x = VectorXd::Zero(n_ + m_);
    for (Index r = 0; r < m_; ++r) x(basis_[static_cast<std::size_t>(r)]) = std::max(xb_(r), 0.0);
    return x;
  }

  std::size_t iterations() const { return iterations_; }

 private:
  const MatrixXd& a_;
  const VectorXd& b_;
  LpOptions opt_;
  Index m_;
  Index n_;
  std::vector<Index> basis_;
  std::vector<Index> in_basis_;
  MatrixXd binv_;
  VectorXd xb_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const Index m = lp.a.rows();
  const Index n = lp.a.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw InvalidInput("lp: dimension mismatch");
  if (!lp.a.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
    throw InvalidInput("lp: non-finite data");

  MatrixXd a = lp.a;
  VectorXd b = lp.b;
  VectorXd sign = VectorXd::Ones(m);
  for (Index r = 0; r < m; ++r) {
    if (b(r) < 0.0) {
      a.row(r) *= -1.0;
      b(r) = -b(r);
      sign(r) = -1.0;
    }
  }

  RevisedSimplex simplex(a, b, options);
  VectorXd phase1 = VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  simplex.optimize(phase1, true);

  LpResult result;
  result.infeasibility = -simplex.objective(phase1);
  const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
  if (result.infeasibility > options.feasibility_tol * scale) {
    result.status = LpStatus::Infeasible;
    result.iterations = simplex.iterations();
    return result;
  }
  simplex.expel_artificials();
  simplex.refactor();

  VectorXd phase2 = VectorXd::Zero(n + m);
  phase2.head(n) = lp.c;
  const bool bounded = simplex.optimize(phase2, false);
  simplex.refactor();
  result.iterations = simplex.iterations();
  if (!bounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x = simplex.solution().head(n);
  const VectorXd y = simplex.duals(phase2);
  result.duals = y.cwiseProduct(sign);
  result.objective = lp.c.dot(result.x);
  result.dual_objective = result.duals.dot(lp.b);
  result.duality_gap = std::abs(result.objective - result.dual_objective);
  const VectorXd reduced = lp.c - lp.a.transpose() * result.duals;
  result.dual_infeasibility = std::max(0.0, reduced.maxCoeff());
  return result;
}

}  // namespace metasrl
