#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace workbench {

// Caller broke a precondition (dimension mismatch, k < 1, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Mathematically undefined input, e.g. cosine of a zero vector.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Bad user-supplied input: empty text, undecodable image bytes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted data is malformed or truncated.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Persisted data carries a schema/format version this build does not read.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// An external provider (HTTP endpoint, fixture) failed.
class ProviderError : public std::runtime_error {
 public:
  ProviderError(const std::string& what, int attempts = 1, bool unreachable = false);

  int attempts() const noexcept { return attempts_; }
  bool unreachable() const noexcept { return unreachable_; }

 private:
  int attempts_;
  bool unreachable_;
};

// The language model produced output that could not be used, even after a re-ask.
class SuggestionError : public std::runtime_error {
 public:
  SuggestionError(const std::string& what, std::string raw_response);
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Provider failure part-way through corpus ingestion.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, std::size_t embedded, std::size_t total);
  std::size_t embedded() const noexcept { return embedded_; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t embedded_;
  std::size_t total_;
};

}  // namespace workbench
