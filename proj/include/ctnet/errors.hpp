#pragma once

#include <stdexcept>
#include <string>

namespace ctnet {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed us something malformed: bad dimensions, bad config values,
// unparseable files.  CLI maps these to exit code 2.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// File parse failure with a 1-based line number for diagnostics.
class ParseError : public InvalidInputError {
 public:
  ParseError(const std::string& what, long line) : InvalidInputError(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// An iteration failed to converge or a matrix function hit a pole.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Principal matrix logarithm is undefined: eigenvalue on the closed
// negative real axis (or at zero).
class BranchCutError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Alias enumeration requires simple, well separated eigenvalues.
class DegenerateSpectrumError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Optimizer / QP solver failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

// The probe series cannot distinguish aliases (integer rate ratio, too short).
class InvalidProbeError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Random system generation exhausted its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctnet
