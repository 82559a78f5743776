#pragma once

#include "metasrl/cmdp.hpp"

namespace metasrl {

/// KL(p || q) for one row, with the 0 ln 0 = 0 convention.
/// Throws InvalidInput if q vanishes where p does not.
double kl_divergence(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                     const Eigen::Ref<const Eigen::RowVectorXd>& q);

/// E_{s ~ nu}[KL(pi(.|s) || phi(.|s))].
double expected_kl(const Vector& nu, const PolicyTable& pi, const PolicyTable& phi);

}  // namespace metasrl
