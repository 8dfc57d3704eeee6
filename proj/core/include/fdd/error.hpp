#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix lengths that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem too large to materialize (e.g. 2^n rows past the guard).
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

/// Linear solve or factorization that produced non-finite output.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A linear system that is rank deficient. Carries the detected rank.
class SingularError : public NumericalError {
 public:
  SingularError(const std::string& what, std::size_t rank, std::size_t size)
      : NumericalError(what), rank_(rank), size_(size) {}
  std::size_t rank() const noexcept { return rank_; }
  std::size_t size() const noexcept { return size_; }

 private:
  std::size_t rank_;
  std::size_t size_;
};

/// Iterative method that hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid experiment configuration (bad key, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdd
