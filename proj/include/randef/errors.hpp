#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace randef {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside its mathematical domain (label out of range, negative sigma, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An upstream artifact is missing or fails hash verification.
class DependencyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Metric requested over an empty sequence.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class CurationError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace randef
