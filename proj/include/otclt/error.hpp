#pragma once

#include <stdexcept>
#include <string>

namespace otclt {

/// Raised when an algorithm fails numerically (divergent quadrature,
/// pivot limit, non-finite intermediate). Input and configuration
/// problems use std::invalid_argument instead; the CLI maps the two
/// categories to distinct exit codes.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace otclt
