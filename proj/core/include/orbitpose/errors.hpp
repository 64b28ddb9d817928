#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orbitpose {

/// Base class for every error raised by the library. Each subclass maps to
/// one failure category so callers (and the CLI exit-code logic) can
/// dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ConstructionFailure : public Error {
 public:
  using Error::Error;
};

class IncompatibleVolume : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A non-finite gradient or loss was observed at optimizer step `step()`.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(long step, const std::string& what);
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace orbitpose
