#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace episcope {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand sorts do not fit the operator (or a substitution's target).
class SortError : public Error {
 public:
  using Error::Error;
};

/// A node references an agent or variable that is not in scope.
class WellFormednessError : public Error {
 public:
  using Error::Error;
};

/// A formula mentions a variable outside the admissible free-variable set.
class FreeVariableError : public Error {
 public:
  using Error::Error;
};

/// Input is outside the fragment an operation accepts (box inside a wp
/// post-formula, unexpanded Kv in the translator, non-FO node in the
/// emitter, ...).
class FragmentError : public Error {
 public:
  using Error::Error;
};

/// Lexical, syntactic or semantic error while reading a task file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
              message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// The explicit-state oracle would need more states than its cap allows.
class StateCapExceeded : public Error {
 public:
  StateCapExceeded(std::size_t requested, std::size_t cap)
      : Error("state count " + std::to_string(requested) +
              " exceeds the cap of " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}

  std::size_t requested() const { return requested_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

/// Failure to run or understand the external solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace episcope
