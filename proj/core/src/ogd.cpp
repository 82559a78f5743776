#include "metasrl/ogd.hpp"

#include <cmath>

#include "metasrl/error.hpp"
#include "metasrl/projection.hpp"

namespace metasrl {

Matrix inexact_ogd_step(const Matrix& x, const Matrix& grad_hat, double beta,
                        const Projector& projector) {
  if (x.rows() != grad_hat.rows() || x.cols() != grad_hat.cols())
    throw InvalidInput("ogd: gradient shape differs from the point");
  if (!grad_hat.allFinite()) throw InvalidInput("ogd: non-finite gradient");
  if (!(beta > 0.0)) throw InvalidInput("ogd: step size must be positive");
  return projector(x - beta * grad_hat);
}

Matrix inexact_multi_ogd(const Matrix& x, const GradientOracle& loss_grad, double alpha,
                         std::size_t inner_steps, const Projector& projector) {
  if (inner_steps == 0) throw InvalidInput("ogd: need at least one inner step");
  Matrix z = x;
  for (std::size_t k = 0; k < inner_steps; ++k) z = inexact_ogd_step(z, loss_grad(z), alpha, projector);
  return z;
}

std::size_t contraction_steps(double lambda, double alpha) {
  if (!(lambda > 0.0) || !(alpha > 0.0)) throw InvalidInput("ogd: need lambda, alpha > 0");
  return static_cast<std::size_t>(std::ceil(std::log(2.0) / std::log1p(lambda * alpha)));
}

Projector shrinkage_simplex_projector(double rho) {
  return [rho](const Matrix& m) { return project_rows_shrinkage_simplex(m, rho); };
}

Projector box_projector(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInput("projection: empty box");
  return [lo, hi](const Matrix& m) -> Matrix { return m.cwiseMax(lo).cwiseMin(hi); };
}

Projector identity_projector() {
  return [](const Matrix& m) { return m; };
}

}  // namespace metasrl
