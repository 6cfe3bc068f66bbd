#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dermfuse {

// Root of every error the library throws. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Sources disagree on the set of image ids.
class MismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Missing or inconsistent configuration (e.g. weighted fusion without weights).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Failures talking to an external prediction provider.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ProviderTimeout : public TransportError {
 public:
  using TransportError::TransportError;
};

class ProviderExitError : public TransportError {
 public:
  ProviderExitError(const std::string& what, int status)
      : TransportError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace dermfuse
