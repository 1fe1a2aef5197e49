#pragma once

#include <stdexcept>
#include <string>

namespace bvi {

// Bad data or violated preconditions (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be parsed; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& msg, long line)
      : ValidationError(msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Iterative numerics failed to converge (CLI exit code 3).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, int iterations, double residual)
      : std::runtime_error(msg + " (iterations=" + std::to_string(iterations) +
                           ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace bvi
