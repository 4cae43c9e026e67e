#pragma once

#include "kg/field_id.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace kg {

class KgError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnknownFieldError : public KgError {
public:
  explicit UnknownFieldError(const FieldId& field)
      : KgError("unknown field '" + field.str() + "'"), field_(field) {}
  const FieldId& field() const noexcept { return field_; }

private:
  FieldId field_;
};

class KindMismatchError : public KgError {
public:
  KindMismatchError(const FieldId& field, const std::string& detail)
      : KgError("kind mismatch for '" + field.str() + "': " + detail), field_(field) {}
  const FieldId& field() const noexcept { return field_; }

private:
  FieldId field_;
};

class NotAnInputError : public KgError {
public:
  explicit NotAnInputError(const FieldId& field)
      : KgError("'" + field.str() + "' is computed and cannot hold a fact"), field_(field) {}
  const FieldId& field() const noexcept { return field_; }

private:
  FieldId field_;
};

class CycleError : public KgError {
public:
  explicit CycleError(std::vector<FieldId> fields);
  const std::vector<FieldId>& fields() const noexcept { return fields_; }

private:
  std::vector<FieldId> fields_;
};

/// Failure classes recorded per calc model during evaluation.
enum class EvalErrorCode { DivisionByZero, Overflow, EnumMismatch, KindMismatch, HostFailure };

std::string_view to_string(EvalErrorCode code);

struct EvalError {
  EvalErrorCode code = EvalErrorCode::HostFailure;
  std::string message;

  friend bool operator==(const EvalError&, const EvalError&) = default;
};

/// Thrown by host functions registered for the CALC gist.
class EvalFailure : public std::runtime_error {
public:
  EvalFailure(EvalErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  EvalErrorCode code() const noexcept { return code_; }

private:
  EvalErrorCode code_;
};

} // namespace kg
