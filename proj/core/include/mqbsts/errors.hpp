#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mqbsts {

// Bad caller input: wrong dimensions, out-of-range hyperparameters.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or incomplete data (CSV schema, NaN cells).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A kernel hit a numerically degenerate state (non-PD matrix, perfect fit, ...).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Cholesky factorization failure; carries the 0-based pivot that was not positive.
class DecompositionError : public NumericalError {
public:
  DecompositionError(const std::string& what, std::size_t pivot)
      : NumericalError(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

private:
  std::size_t pivot_;
};

}  // namespace mqbsts
