#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jumplq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must stay above the positivity floor did not.
class NotUniformlyPositive : public Error {
 public:
  explicit NotUniformlyPositive(double min_eig, std::string where = {});
  double min_eig() const noexcept { return min_eig_; }

 private:
  double min_eig_;
};

/// Riccati iterate left the PSD cone beyond the rounding allowance.
class PsdViolation : public Error {
 public:
  PsdViolation(std::size_t node, double min_eig);
  std::size_t node() const noexcept { return node_; }
  double min_eig() const noexcept { return min_eig_; }

 private:
  std::size_t node_;
  double min_eig_;
};

class OutOfHorizon : public Error {
 public:
  using Error::Error;
};

class UnknownBenchmark : public Error {
 public:
  using Error::Error;
};

/// Problem or grid data that fails validation.
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

/// JSON problem file could not be decoded; the message starts with the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t max_iter, double last_deviation);
  std::size_t max_iter() const noexcept { return max_iter_; }
  double last_deviation() const noexcept { return last_deviation_; }

 private:
  std::size_t max_iter_;
  double last_deviation_;
};

class MonotonicityViolation : public Error {
 public:
  MonotonicityViolation(std::size_t iteration, double min_eig);
  std::size_t iteration() const noexcept { return iteration_; }
  double min_eig() const noexcept { return min_eig_; }

 private:
  std::size_t iteration_;
  double min_eig_;
};

/// A simulated state or Riccati iterate overflowed; usually a grid too coarse
/// for the coefficients.
class NonFinite : public Error {
 public:
  explicit NonFinite(std::size_t step);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace jumplq
