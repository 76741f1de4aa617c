#pragma once

#include <stdexcept>
#include <string>

namespace qndcount {

// Base class of every error thrown by the library. The CLI maps the concrete
// type onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An operation's precondition on its input state was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Requested problem size exceeds a configured guard.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// A numerical propagation could not meet its tolerance.
class IntegratorError : public Error {
 public:
  IntegratorError(const std::string& what, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Conditioning on a measurement outcome of probability zero.
class ImpossibleOutcomeError : public Error {
 public:
  using Error::Error;
};

// Every candidate assigns zero likelihood to the measurement record.
class InconsistentRecordError : public Error {
 public:
  using Error::Error;
};

// A precomputed schedule ran out of drive times.
class ScheduleExhaustedError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qndcount
