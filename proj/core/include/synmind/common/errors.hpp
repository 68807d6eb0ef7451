#pragma once

#include <stdexcept>
#include <string>

namespace synmind {

/// Invalid configuration values (bad dimensions, negative counts, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shape mismatch; message names both operands.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Corrupt or incompatible on-disk data; message names the offending field.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A required input file or artifact is missing.
class MissingInputError : public std::runtime_error {
 public:
  explicit MissingInputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// VLM client transport failure after retries.
class ClientError : public std::runtime_error {
 public:
  ClientError(const std::string& msg, int attempts)
      : std::runtime_error(msg), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

/// Caption synthesis could not satisfy its constraints.
class CaptionError : public std::runtime_error {
 public:
  explicit CaptionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during training (NaN loss or gradient).
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operation called in a mode that forbids it.
class ModeError : public std::runtime_error {
 public:
  explicit ModeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented invariant was violated by the inputs.
class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace synmind
