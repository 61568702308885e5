#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace algmech {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An expression could not be evaluated at a point (unbound variable,
/// division by zero, logarithm of a non-positive number, ...).
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> point = {})
      : Error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t expected, std::size_t found)
      : Error("subbundle span has numerical rank " + std::to_string(found) +
              ", expected " + std::to_string(expected)),
        expected_(expected),
        found_(found) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t expected_, found_;
};

/// The Lagrangian restricted to the constraint subbundle is not regular, so
/// the explicit reduced equations cannot be formed.
class Degenerate : public Error {
 public:
  explicit Degenerate(double condition)
      : Error("restricted Hessian of the Lagrangian is singular (condition number " +
              std::to_string(condition) + " >= 1e12)"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(std::size_t step, double residual, const std::string& why)
      : Error("Newton iteration failed at step " + std::to_string(step) + " (" + why +
              "), last residual " + std::to_string(residual)),
        step_(step),
        residual_(residual) {}
  std::size_t step() const noexcept { return step_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t step_;
  double residual_;
};

class HypothesisViolated : public Error {
 public:
  HypothesisViolated(std::string condition, std::vector<double> point, double value)
      : Error("Hamilton-Jacobi hypothesis '" + condition + "' violated (value " +
              std::to_string(value) + ")"),
        condition_(std::move(condition)),
        point_(std::move(point)),
        value_(value) {}
  const std::string& condition() const noexcept { return condition_; }
  const std::vector<double>& point() const noexcept { return point_; }
  double value() const noexcept { return value_; }

 private:
  std::string condition_;
  std::vector<double> point_;
  double value_;
};

class IntegrationBlowUp : public Error {
 public:
  IntegrationBlowUp(std::size_t step, double norm)
      : Error("trajectory left the bounded region at step " + std::to_string(step) +
              " (|x| = " + std::to_string(norm) + ")"),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class UnknownModel : public Error {
 public:
  explicit UnknownModel(const std::string& name) : Error("unknown model '" + name + "'") {}
};

class BadParams : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace algmech
