#pragma once

#include <stdexcept>
#include <string>

namespace wheelslam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain argument.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Correlation requested on a sequence with zero variance.
class DegenerateSequence : public Error {
 public:
  using Error::Error;
};

/// Static alignment rejected the data (vehicle was moving).
class AlignmentFailed : public Error {
 public:
  using Error::Error;
};

/// Covariance lost symmetry or positive semi-definiteness.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Every particle weight collapsed to zero.
class FilterDegeneracy : public Error {
 public:
  using Error::Error;
};

/// Scene or trajectory description that cannot be realized.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wheelslam
