#pragma once

#include <stdexcept>
#include <string>

namespace fddgauss {

// Raised when a caller-supplied argument violates an operation precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A moment or constant that the requested operation needs is infinite or undefined.
class MomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The assignment solver refuses problems larger than its configured cap.
class CapacityError : public std::length_error {
 public:
  CapacityError(std::size_t requested, std::size_t cap)
      : std::length_error("problem size " + std::to_string(requested) +
                          " exceeds solver cap " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

// An iterative numerical routine failed to meet its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A bound was applied outside the range where it holds.
class PreconditionViolation : public std::domain_error {
 public:
  PreconditionViolation(const std::string& what, double value, double threshold)
      : std::domain_error(what + ": value " + std::to_string(value) +
                          " exceeds threshold " + std::to_string(threshold)),
        value_(value),
        threshold_(threshold) {}
  double value() const { return value_; }
  double threshold() const { return threshold_; }

 private:
  double value_;
  double threshold_;
};

}  // namespace fddgauss
