#pragma once

#include <stdexcept>
#include <string>

namespace leiblab {

/// Parameter or argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exponent tuple violates an admissibility constraint (a > D/nu, lambda > a, ...).
class AdmissibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time loop aborted (step cap, mass leak).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace leiblab
