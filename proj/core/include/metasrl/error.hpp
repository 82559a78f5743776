#pragma once

#include <stdexcept>
#include <string>

namespace metasrl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, non-finite values, out-of-range parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A linear solve or iterative solver failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double best_bound = 0.0)
      : Error(what), best_bound_(best_bound) {}
  double best_bound() const noexcept { return best_bound_; }

 private:
  double best_bound_;
};

/// The environment sampler could not produce a transition.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

/// An estimate collapsed (e.g. every correction weight was zero).
class DegenerateEstimate : public Error {
 public:
  using Error::Error;
};

/// Task generation could not produce a valid instance.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

/// Filesystem or format problems, always carrying the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace metasrl
