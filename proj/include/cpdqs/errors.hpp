#ifndef CPDQS_ERRORS_HPP
#define CPDQS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cpdqs {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A vector or matrix does not conform to the instance's block structure.
class ConformanceError : public Error {
public:
  using Error::Error;
};

// A rotamer choice lies outside its block, or an assignment is malformed.
class InvalidAssignmentError : public Error {
public:
  using Error::Error;
};

// Input to rounding violates the nonnegativity precondition.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// The nonmonotone line search drove the step below the underflow floor,
// which signals a non-descent direction or an inconsistent gradient.
class LineSearchError : public Error {
public:
  using Error::Error;
};

// NaN or Inf appeared in an objective or gradient evaluation.
class NumericError : public Error {
public:
  NumericError(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

private:
  long iteration_ = -1;
};

// Exhaustive enumeration was requested for a search space above the guard.
class SearchSpaceError : public Error {
public:
  using Error::Error;
};

// Malformed instance file; carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_ = -1;
};

// Importer could not recognize the on-disk layout.
class UnsupportedFormatError : public Error {
public:
  using Error::Error;
};

}  // namespace cpdqs

#endif  // CPDQS_ERRORS_HPP
