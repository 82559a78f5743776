#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace metasrl {

/// One splitmix64 step; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of words into one seed. Order matters.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

/// mt19937_64 with hand-rolled variates so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  /// Draws an index with probability proportional to `weights` (nonnegative, any vector shape).
  template <typename Derived>
  std::size_t categorical(const Eigen::DenseBase<Derived>& weights) {
    const double total = weights.sum();
    if (!(total > 0.0) || !std::isfinite(total)) throw_bad_weights();
    const double u = uniform01() * total;
    double acc = 0.0;
    Eigen::Index last = 0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const double w = weights.derived().coeff(i);
      if (w <= 0.0) continue;
      acc += w;
      last = i;
      if (u < acc) return static_cast<std::size_t>(i);
    }
    return static_cast<std::size_t>(last);
  }

  double exponential() { return -std::log1p(-uniform01()); }
  double normal();

  /// Flat Dirichlet sample of dimension n.
  Eigen::VectorXd dirichlet(std::size_t n);

 private:
  [[noreturn]] static void throw_bad_weights();

  std::mt19937_64 engine_;
};

}  // namespace metasrl
