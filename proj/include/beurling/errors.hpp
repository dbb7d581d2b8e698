#pragma once

#include <stdexcept>
#include <string>

namespace beurling {

// Argument outside the region where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Evaluation at a pole (Z(s) at s = 1, log(s/(s-1)) at s = 1).
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A function returned a non-finite value where a finite one is required.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Work or memory budget exceeded. reached() is the largest horizon that fit.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double reached)
      : std::runtime_error(what), reached_(reached) {}
  double reached() const noexcept { return reached_; }

 private:
  double reached_;
};

class ToleranceError : public std::runtime_error {
 public:
  ToleranceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The B-series would converge too slowly (smallest atom too close to 1).
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling grid too coarse for the requested gaps.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration. path() is a JSON pointer to the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace beurling
