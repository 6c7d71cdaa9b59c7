#pragma once

#include <stdexcept>
#include <string>

namespace igabem {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a precondition (dimension mismatch, index out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Surface topology is not a watertight, consistently oriented multipatch.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Degenerate parametrization or a kernel evaluated at its singularity.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: NaN in assembly, singular matrix, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace igabem
