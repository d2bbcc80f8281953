#pragma once

#include <stdexcept>
#include <string>

namespace inband {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid or pyramid has the wrong shape (non power-of-two side, mismatched planes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Level, reduction level or index outside the admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an API precondition (axis mismatch, non dyadic scale, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input carries no usable signal (empty mask, zero-norm plane, flat image).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; `stage()` names it.
class EstimationError : public DegenerateInputError {
 public:
  EstimationError(std::string stage, const std::string& what)
      : DegenerateInputError(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Unsupported or corrupt image / scenario file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace inband
