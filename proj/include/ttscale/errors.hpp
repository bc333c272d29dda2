// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ttscale {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class MissingPlaceholderError : public Error {
 public:
  MissingPlaceholderError(std::string slot)
      : Error("unfilled placeholder '" + slot + "'"), slot_(std::move(slot)) {}

  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

class UnknownTemplateError : public Error {
 public:
  using Error::Error;
};

/// Failure to append to the run log; always fatal for the run.
class StorageError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool transient)
      : Error(what), transient_(transient) {}

  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class TransportExhaustedError : public Error {
 public:
  using Error::Error;
};

class FixtureMissError : public Error {
 public:
  using Error::Error;
};

class MalformedResponseError : public Error {
 public:
  using Error::Error;
};

class SandboxUnavailableError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class VerdictParseError : public Error {
 public:
  enum class Kind { NoObjectFound, SchemaViolation };

  VerdictParseError(Kind kind, std::string field, const std::string& what)
      : Error(what), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  /// Offending field for schema violations, empty otherwise.
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

class EmptyRunError : public Error {
 public:
  using Error::Error;
};

}  // namespace ttscale
