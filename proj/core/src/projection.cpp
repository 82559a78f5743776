#include "metasrl/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "metasrl/error.hpp"

namespace metasrl {
namespace {

// Sort-based projection onto the unit simplex.
Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += u[static_cast<std::size_t>(k)];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace

Vector project_row_shrinkage_simplex(const Vector& v, double rho) {
  const Eigen::Index n = v.size();
  if (n == 0) throw InvalidInput("projection: empty vector");
  if (!v.allFinite()) throw InvalidInput("projection: non-finite input");
  if (!(rho >= 0.0) || rho * static_cast<double>(n) >= 1.0)
    throw InvalidInput("projection: shrinkage must satisfy 0 <= rho < 1/n");
  const double scale = 1.0 - static_cast<double>(n) * rho;
  const Vector b = project_simplex((v.array() - rho).matrix() / scale);
  Vector out = (b.array() * scale + rho).matrix();
  return out;
}

Matrix project_rows_shrinkage_simplex(const Matrix& table, double rho) {
  Matrix out(table.rows(), table.cols());
  for (Eigen::Index s = 0; s < table.rows(); ++s)
    out.row(s) = project_row_shrinkage_simplex(table.row(s).transpose(), rho).transpose();
  return out;
}

Vector project_box(const Vector& v, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInput("projection: empty box");
  return v.cwiseMax(lo).cwiseMin(hi);
}

bool in_shrinkage_simplex(const Matrix& table, double rho, double tol) {
  for (Eigen::Index s = 0; s < table.rows(); ++s)
    if (std::abs(table.row(s).sum() - 1.0) > tol || table.row(s).minCoeff() < rho - tol) return false;
  return true;
}

}  // namespace metasrl
