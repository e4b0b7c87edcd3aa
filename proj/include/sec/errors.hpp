#pragma once

#include <stdexcept>
#include <string>

namespace sec {

// Raised when a raw observation carries NaN/inf or a negative distance.
class MalformedObservation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a caller breaks an operation's precondition (e.g. feeding a
// balancer event into the balancer, or a zero-length game).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Base for every persistence failure. `path()` names the offending file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFile : public FormatError {
 public:
  using FormatError::FormatError;
};

class ShapeMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class MissingFile : public FormatError {
 public:
  using FormatError::FormatError;
};

class NonContiguousIndices : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace sec
