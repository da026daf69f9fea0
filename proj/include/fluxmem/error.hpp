#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fluxmem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad config, empty input, unknown id).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : InvalidArgument("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                        std::to_string(actual)) {}
};

/// Argument outside the mathematical domain of a density or gate (x not in (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Remote embedding / LLM provider failed or could not be reached.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}

  const std::string& payload() const noexcept { return payload_; }

 private:
  std::string payload_;
};

/// Provider answered, but the body did not have the shape we asked for.
class MalformedResponse : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Line-oriented input (JSONL transcripts, benchmark files) failed to parse or validate.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fluxmem
