#pragma once

#include <stdexcept>
#include <string>

namespace catlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an SGD step would consume a non-finite gradient.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an attack hits a non-finite loss or gradient.
struct AttackError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace catlab
