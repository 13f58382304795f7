#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sprayconn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument value failed (level out of range, point
/// outside a chart, empty scalar list, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Block sizes or arities do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Expression evaluation hit a non-differentiable point. `node()` is the
/// source text of the offending sub-expression.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::string node)
      : Error(what + " at '" + node + "'"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// Text could not be parsed. Line is 0 when the source has no line structure.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(format(what, line, column)), message_(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  /// The message without the location prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    std::string loc = line > 0 ? std::to_string(line) + ":" : std::string{};
    return loc + std::to_string(column) + ": " + what;
  }
  std::string message_;
  int line_;
  int column_;
};

/// Invalid configuration: conflicting declarations, missing inverse
/// transitions, metric not declared, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A name in the manifold definition does not resolve.
class UnresolvedReference : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// No sampled point satisfied both domain predicates of an overlap.
class EmptyOverlapError : public Error {
 public:
  using Error::Error;
};

/// A spray whose fiber part is not quadratic.
class NotQuadraticError : public Error {
 public:
  NotQuadraticError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A black-box splitting or projector failed its validation.
class SplittingRejected : public Error {
 public:
  SplittingRejected(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Geodesic integration could not continue. Carries the last accepted state.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::string chart, std::vector<double> x,
                   std::vector<double> v, double t)
      : Error(what + " at t = " + std::to_string(t) + " in chart '" + chart + "'"),
        chart_(std::move(chart)), x_(std::move(x)), v_(std::move(v)), t_(t) {}

  const std::string& chart() const noexcept { return chart_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& v() const noexcept { return v_; }
  double t() const noexcept { return t_; }

 private:
  std::string chart_;
  std::vector<double> x_;
  std::vector<double> v_;
  double t_;
};

}  // namespace sprayconn
