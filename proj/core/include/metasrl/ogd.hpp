#pragma once

#include <functional>

#include "metasrl/cmdp.hpp"

namespace metasrl {

/// Maps an arbitrary point back into the feasible set.
using Projector = std::function<Matrix(const Matrix&)>;
/// Possibly inexact gradient of the current loss at a point.
using GradientOracle = std::function<Matrix(const Matrix&)>;

/// projector(x - beta * grad_hat).
Matrix inexact_ogd_step(const Matrix& x, const Matrix& grad_hat, double beta,
                        const Projector& projector);

/// K projected steps z^{k+1} = projector(z^k - alpha * grad(z^k)) from z^1 = x.
Matrix inexact_multi_ogd(const Matrix& x, const GradientOracle& loss_grad, double alpha,
                         std::size_t inner_steps, const Projector& projector);

/// Smallest K with (1 + lambda alpha)^K >= 2.
std::size_t contraction_steps(double lambda, double alpha);

Projector shrinkage_simplex_projector(double rho);
Projector box_projector(double lo, double hi);
Projector identity_projector();

}  // namespace metasrl
