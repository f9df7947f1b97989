#pragma once

#include <stdexcept>
#include <string>

namespace gibbslearn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Dense dimension or memory cap exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Search space larger than the configured enumeration cap.
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& what, double required = 0.0)
      : Error(what), required_(required) {}
  double required() const { return required_; }

 private:
  double required_;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class IncompletePlan : public Error {
 public:
  using Error::Error;
};

class NumericalStateError : public Error {
 public:
  using Error::Error;
};

// Internal inconsistency, e.g. a non-Hermitian Hamiltonian.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ModeMismatch : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace gibbslearn
