#include "metasrl/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "metasrl/error.hpp"

namespace metasrl {

double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                     const Eigen::Ref<const Eigen::RowVectorXd>& q) {
  if (p.size() != q.size()) throw InvalidInput("kl: dimension mismatch");
  double total = 0.0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    if (p(a) <= 0.0) continue;
    if (q(a) <= 0.0) throw InvalidInput("kl: reference has zero mass on the support");
    total += p(a) * std::log(p(a) / q(a));
  }
  // Rows of p or q that sum to one only up to rounding can push this below zero.
  return std::max(total, 0.0);
}

double expected_kl(const Vector& nu, const PolicyTable& pi, const PolicyTable& phi) {
  if (pi.rows() != nu.size() || phi.rows() != nu.size() || pi.cols() != phi.cols())
    throw InvalidInput("expected_kl: dimension mismatch");
  double total = 0.0;
  for (Eigen::Index s = 0; s < nu.size(); ++s)
    if (nu(s) > 0.0) total += nu(s) * kl_divergence(pi.row(s), phi.row(s));
  return total;
}

}  // namespace metasrl
