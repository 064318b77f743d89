#pragma once

#include <stdexcept>
#include <string>

namespace satkit {

/// Base class for all satkit-specific failures.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed DIMACS input.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error("parse error at line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// A resource cap (solver decisions, sampler attempts) ran out before an
/// answer was reached. Never conflated with "unsatisfiable".
class BudgetExhausted : public Error {
public:
  using Error::Error;
};

/// Backbone requested for an unsatisfiable instance.
class BackboneUndefined : public Error {
public:
  using Error::Error;
};

/// Robustness trial requested for an instance with an empty backbone.
class RobustnessUndefined : public Error {
public:
  using Error::Error;
};

/// Local search reached a state whose only unsatisfied clause is empty.
class UnflippableClause : public Error {
public:
  using Error::Error;
};

} // namespace satkit
