#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qpalign {

/// Argument outside the mathematical domain of an operation (|x| >= 1 for phi, nu <= 2, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Shapes of the operands do not agree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Bad call: wrong model kind, oversized oracle request, non-finite input.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qpalign
