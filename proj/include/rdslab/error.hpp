#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed reaction DSL. line() is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Invalid scenario or argument combination, detected before any compute.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Solver non-convergence, positivity failure, degenerate equilibrium class.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdslab
