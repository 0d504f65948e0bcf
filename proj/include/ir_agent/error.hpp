#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ir_agent {

enum class ErrorCategory {
  kUsage,    // bad flag or argument combination
  kSchema,   // input file violates its declared format
  kIo,       // file missing or unwritable
  kDomain,   // operation precondition violated
  kParse,    // SMILES grammar error
  kBackend,  // LLM backend failure after retries
  kNumeric,  // non-finite value during training
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error(ErrorCategory::kDomain, message) {}
};

/// Rejection of a specific sample in a vector-valued input.
class SampleError : public DomainError {
 public:
  SampleError(const std::string& message, std::size_t index)
      : DomainError(message + " (sample " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Record-level format violation. `line` is 1-based; 0 means "whole file".
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::size_t line = 0)
      : Error(ErrorCategory::kSchema,
              line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::kIo, message) {}
};

class BackendError : public Error {
 public:
  BackendError(const std::string& message, int status = 0)
      : Error(ErrorCategory::kBackend, message), status_(status) {}

  /// HTTP status of the last attempt, 0 for transport errors and timeouts.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorCategory::kNumeric, message) {}
};

}  // namespace ir_agent
