#pragma once

#include <stdexcept>
#include <string>

namespace wpme {

/// Argument outside the domain where a quantity is defined (y = 0 for a
/// singular weight, t >= blow-up horizon, R beyond the grid, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative or quadrature procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed parameters or configuration input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace wpme
