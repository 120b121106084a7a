#pragma once

#include <stdexcept>
#include <string>

namespace demf {

// Invalid user input: parameters, files, configuration. Maps to CLI exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (non-SPD matrix, quadrature did not converge).
// Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace demf
