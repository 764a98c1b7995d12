#pragma once

#include <stdexcept>
#include <string>

namespace stokeswim {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A matrix handed to vee() (or similar) does not have the required algebraic
// structure within tolerance.
struct StructureViolation : Error {
  using Error::Error;
};

// The assembled grand resistance matrix is not positive (semi)definite.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

// A documented operation precondition was violated by the caller.
struct PreconditionViolation : Error {
  using Error::Error;
};

// Closed-form field evaluation requested outside its validity domain
// (c_tau = 0 without asking for the scallop branch, or vice versa).
struct DegenerateClosedForm : Error {
  using Error::Error;
};

// A finite-difference stencil (or nested bracket evaluation) failed.
struct NumericalJacobianFailure : Error {
  using Error::Error;
};

// Planner options are contradictory or unusable.
struct InfeasibleOptions : Error {
  using Error::Error;
};

// Experiment configuration failed validation; message names the field.
struct ConfigInvalid : Error {
  using Error::Error;
};

}  // namespace stokeswim
