#pragma once

#include <stdexcept>
#include <string>

namespace frbm {

// Input or construction problems (bad parameters, refused resolutions,
// malformed configs). The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver non-convergence, path-abort budgets exceeded and similar. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidWord : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace frbm
