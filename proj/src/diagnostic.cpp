#include "kg/diagnostic.hpp"
#include "kg/errors.hpp"
#include "kg/field_id.hpp"

#include <algorithm>
#include <sstream>

namespace kg {

std::string format_diagnostic(const Diagnostic& d) {
  std::ostringstream os;
  os << (d.location.file.empty() ? "<input>" : d.location.file) << ':' << d.location.line << ':'
     << d.location.column << ": " << (d.is_error() ? "error" : "warning") << ' ' << d.code << ": "
     << d.message;
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.is_error(); });
}

bool FieldId::is_valid_token(std::string_view token) noexcept {
  if (token.empty()) {
    return false;
  }
  return std::all_of(token.begin(), token.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.';
  });
}

namespace {
std::string cycle_message(const std::vector<FieldId>& fields) {
  std::string msg = "dependency cycle through";
  for (const auto& f : fields) {
    msg += ' ';
    msg += f.str();
  }
  return msg;
}
} // namespace

CycleError::CycleError(std::vector<FieldId> fields)
    : KgError(cycle_message(fields)), fields_(std::move(fields)) {}

std::string_view to_string(EvalErrorCode code) {
  switch (code) {
  case EvalErrorCode::DivisionByZero:
    return "division-by-zero";
  case EvalErrorCode::Overflow:
    return "overflow";
  case EvalErrorCode::EnumMismatch:
    return "enum-mismatch";
  case EvalErrorCode::KindMismatch:
    return "kind-mismatch";
  case EvalErrorCode::HostFailure:
    return "host-failure";
  }
  return "?";
}

} // namespace kg
