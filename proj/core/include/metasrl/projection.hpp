#pragma once

#include "metasrl/cmdp.hpp"

namespace metasrl {

/// Euclidean projection onto {a : sum a = 1, a_i >= rho}. Requires 0 <= rho < 1/n.
Vector project_row_shrinkage_simplex(const Vector& v, double rho);

/// Row-wise projection of a table onto the shrinkage simplex.
Matrix project_rows_shrinkage_simplex(const Matrix& table, double rho);

/// Euclidean projection onto the box [lo, hi]^n.
Vector project_box(const Vector& v, double lo, double hi);

/// True if every row sums to one within tol and every entry is >= rho - tol.
bool in_shrinkage_simplex(const Matrix& table, double rho, double tol = 1e-12);

}  // namespace metasrl
