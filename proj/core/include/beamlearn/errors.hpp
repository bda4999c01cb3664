#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beamlearn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Raised when a polar projection is requested for a (numerically) singular matrix.
class SingularInputError : public Error {
 public:
  using Error::Error;
};

class NotUnitaryError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened / read / written.
class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Evaluator mode does not match the channel model it was asked to integrate.
class ModeMismatchError : public Error {
 public:
  using Error::Error;
};

/// The MSP gradient lost rank, so the unitary projection is not unique.
class DegenerateGradientError : public Error {
 public:
  DegenerateGradientError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace beamlearn
