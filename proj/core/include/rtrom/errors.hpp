#pragma once

#include <stdexcept>
#include <string>

namespace rtrom {

/// Invalid argument to a numerical routine (bad sizes, empty inputs, zero counts).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or unsupported configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical failure: singular block, inner solver breakdown, non-SPD operator.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data that is well formed but does not match the discretization it is used with.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtrom
