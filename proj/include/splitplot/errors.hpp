#pragma once

#include <stdexcept>
#include <string>

namespace splitplot {

/// Bad user input: malformed files, inconsistent specs, unknown names.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Singular information matrices, rank deficiency, failed searches.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitplot
