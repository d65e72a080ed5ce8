#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sibp {

/// A sampler or linear solve could not produce a finite result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; `line` is 1-based (0 when not applicable).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) +
                                           (column ? ", column " + std::to_string(column) : "") +
                                           ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace sibp
