#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace psvrg {

/// Invalid arguments: dimension mismatch, negative parameters, bad indices.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed dataset input. Carries the 1-based line and column of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A solver produced a non-finite coordinate.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& solver, std::uint64_t iteration)
      : std::runtime_error(solver + " diverged at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::uint64_t iteration_;
};

/// Exact enumeration was requested above the configured size limit.
class EnumerationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace psvrg
