#pragma once

#include <stdexcept>
#include <string>

namespace privsum {

// Bad arguments, malformed inputs, plan/flag validation. CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Key material problems: missing ring entries, entitlement mismatches,
// randomness source failure. CLI exit code 3.
class KeyError : public std::runtime_error {
 public:
  explicit KeyError(const std::string& what) : std::runtime_error(what) {}
};

// Group decryption refused because pads provably do not cancel
// (missing member data or weighted sums under chain/graph plans).
class CancellationError : public KeyError {
 public:
  explicit CancellationError(const std::string& what) : KeyError(what) {}
};

// Aggregate rejected because the plaintext sum could exceed the modulus.
// CLI exit code 4.
class OverflowGuardError : public std::runtime_error {
 public:
  explicit OverflowGuardError(const std::string& what)
      : std::runtime_error(what) {}
};

// Second ingest of the same (user_id, timestamp).
class DuplicateRecordError : public std::runtime_error {
 public:
  explicit DuplicateRecordError(const std::string& what)
      : std::runtime_error(what) {}
};

// Could not reach the service or the reply was unusable. Retryable.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace privsum
