#include "metasrl/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "metasrl/error.hpp"
#include "metasrl/ogd.hpp"

namespace metasrl {

DynamicRegretConstants dynamic_regret_constants(const LossRegularity& reg, double alpha, double beta,
                                                double subgrad_const) {
  const double lambda = reg.strong_convexity;
  const double l1 = reg.lipschitz;
  const double l2 = reg.smoothness;
  if (!(lambda > 0.0) || !(l1 > 0.0) || !(l2 >= lambda))
    throw InvalidInput("dynamic bound: need 0 < lambda <= L2 and L1 > 0");
  if (!(alpha > 0.0) || alpha > 1.0 / (2.0 * l2) * (1.0 + 1e-12))
    throw InvalidInput("dynamic bound: step must satisfy 0 < alpha <= 1/(2 L2)");
  if (!(beta > 0.0) || !(subgrad_const >= 0.0)) throw InvalidInput("dynamic bound: bad beta or c");
  const double c = subgrad_const;
  DynamicRegretConstants k;
  k.alpha = alpha;
  k.beta = beta;
  k.inner_steps = contraction_steps(lambda, alpha);
  k.c1 = 2.0 * (l2 + beta);
  k.c2 = (l2 + beta) * (3.0 * c * alpha + 6.0 * alpha * l2) / (2.0 * lambda * alpha * l2);
  k.c3 = 3.0 * (l2 + beta);
  k.c4 = 2.0 * l1 / (2.0 - std::sqrt(2.0));
  k.c5 = k.c4 * std::sqrt((c * alpha + 2.0 * l2 * alpha) / (2.0 * alpha * lambda * l2));
  return k;
}

double dynamic_regret_bound(const DynamicRegretConstants& k, const DynamicRegretTerms& t) {
  const double squared_form = k.c1 * t.initial_distance * t.initial_distance +
                              k.c2 * t.cumulative_inexactness + k.c3 * t.sq_path_length +
                              t.sum_sq_grad_at_comparators / (2.0 * k.beta);
  const double path_form =
      k.c4 * t.initial_distance + k.c5 * t.sum_sqrt_inexactness + k.c4 * t.path_length;
  return std::min(squared_form, path_form);
}

double static_regret_bound(const LossRegularity& reg, double comparator_norm, std::size_t rounds,
                           double cumulative_inexactness, double subgrad_const) {
  if (rounds == 0) throw InvalidInput("static bound: need at least one round");
  const double t = static_cast<double>(rounds);
  return reg.lipschitz * comparator_norm * std::sqrt(2.0 * t) +
         (1.0 + std::sqrt(2.0) * subgrad_const * reg.lipschitz * reg.smoothness * comparator_norm /
                    std::sqrt(t)) *
             cumulative_inexactness;
}

double static_regret_step(const LossRegularity& reg, double comparator_norm, std::size_t rounds) {
  if (rounds == 0 || !(reg.lipschitz > 0.0)) throw InvalidInput("static step: bad inputs");
  return comparator_norm / (reg.lipschitz * std::sqrt(2.0 * static_cast<double>(rounds)));
}

}  // namespace metasrl
