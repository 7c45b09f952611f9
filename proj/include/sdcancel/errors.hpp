#pragma once

#include <stdexcept>
#include <string>

namespace sdcancel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or channel dimensions do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite data, singular solves, eigen/Schur solver failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The algebraic loop I - D22*Dk of an interconnection is singular.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// A delay does not land on the fast sampling grid.
class OffGridDelayError : public Error {
 public:
  explicit OffGridDelayError(const std::string& what)
      : Error("delay not on FSFH grid: " + what) {}
};

/// Synthesis found no admissible controller.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Precondition on the input data violated (unstable block, bad parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sdcancel
