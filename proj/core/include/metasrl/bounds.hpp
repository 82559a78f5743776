#pragma once

#include <cstddef>

namespace metasrl {

/// Regularity of a loss family: lambda-strongly convex, L1-Lipschitz, L2-smooth.
struct LossRegularity {
  double strong_convexity = 1.0;
  double lipschitz = 1.0;
  double smoothness = 1.0;
};

struct DynamicRegretConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t inner_steps = 0;
};

/// Constants of the multi-step dynamic bound. `alpha` must not exceed 1/(2 L2);
/// `subgrad_const` is c with ||u - grad f||^2 <= c eps (2 L2 in an open domain).
DynamicRegretConstants dynamic_regret_constants(const LossRegularity& reg, double alpha, double beta,
                                                double subgrad_const);

struct DynamicRegretTerms {
  double initial_distance = 0.0;     // ||x_1 - x_1^*||
  double cumulative_inexactness = 0.0;  // sum eps_t
  double sum_sqrt_inexactness = 0.0;    // sum sqrt(eps_t)
  double sq_path_length = 0.0;
  double path_length = 0.0;
  double sum_sq_grad_at_comparators = 0.0;
};

/// min of the squared-path and path-length forms.
double dynamic_regret_bound(const DynamicRegretConstants& k, const DynamicRegretTerms& terms);

/// L1 ||x|| sqrt(2T) + (1 + sqrt(2) c L1 L2 ||x|| / sqrt(T)) sum eps_t.
double static_regret_bound(const LossRegularity& reg, double comparator_norm, std::size_t rounds,
                           double cumulative_inexactness, double subgrad_const);

/// Step size ||x|| / (L1 sqrt(2T)) attaining the static bound.
double static_regret_step(const LossRegularity& reg, double comparator_norm, std::size_t rounds);

}  // namespace metasrl
