#include "metasrl/rng.hpp"

#include <cmath>

#include "metasrl/error.hpp"

namespace metasrl {

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw InvalidInput("index range is empty");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = -bound % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= limit) return static_cast<std::size_t>(x % bound);
  }
}

void Rng::throw_bad_weights() { throw InvalidInput("categorical weights must have positive mass"); }

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::VectorXd Rng::dirichlet(std::size_t n) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = exponential();
  return x / x.sum();
}

}  // namespace metasrl
