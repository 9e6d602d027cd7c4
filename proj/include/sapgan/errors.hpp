#pragma once

#include <stdexcept>
#include <string>

namespace sapgan {

// Raised on any tensor/shape contract violation. Messages carry the offending dims.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be read, decoded, or written. Messages name the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf observed during a training step or backward pass.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Survey rows or report inputs that violate the response schema.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sapgan
