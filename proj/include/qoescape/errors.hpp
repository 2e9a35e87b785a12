#ifndef QOESCAPE_ERRORS_HPP
#define QOESCAPE_ERRORS_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qoescape {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A value falls outside the mathematical domain of a metric.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A finite-difference stencil would leave the valid (a, h0) domain.
class StepTooLargeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed input text. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Fewer than two nodes survive construction or reduction.
class DegenerateGraphError : public Error {
 public:
  using Error::Error;
};

class ConnectivityError : public Error {
 public:
  ConnectivityError(std::uint64_t from, std::uint64_t to)
      : Error("graph is disconnected: no path from " + std::to_string(from) +
              " to " + std::to_string(to)),
        from_(from),
        to_(to) {}

  std::uint64_t from_label() const noexcept { return from_; }
  std::uint64_t to_label() const noexcept { return to_; }

 private:
  std::uint64_t from_;
  std::uint64_t to_;
};

/// Command-line misuse (bad flag combination, too few inputs).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace qoescape

#endif  // QOESCAPE_ERRORS_HPP
