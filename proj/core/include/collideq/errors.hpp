#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace collideq {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSubsystem : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

class NotUnitary : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NotDiagonal : public Error {
 public:
  using Error::Error;
};

class NonUniqueSteadyState : public Error {
 public:
  NonUniqueSteadyState(const std::string& what, std::size_t multiplicity)
      : Error(what), multiplicity_(multiplicity) {}

  // Number of eigenvalues found on the unit circle.
  std::size_t multiplicity() const noexcept { return multiplicity_; }

 private:
  std::size_t multiplicity_;
};

class IntegrationUnstable : public Error {
 public:
  using Error::Error;
};

class NumericalPositivityError : public Error {
 public:
  using Error::Error;
};

}  // namespace collideq
