#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace kg {

struct SourceLocation {
  std::string file;
  int line = 1;
  int column = 1;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

enum class Severity { Error, Warning };

/// Registry of diagnostic codes. docs/format.md documents each one.
namespace codes {
inline constexpr std::string_view kMalformedXml = "KG001";
inline constexpr std::string_view kUnknownElement = "KG002";
inline constexpr std::string_view kUnknownAttribute = "KG003";
inline constexpr std::string_view kMissingAttribute = "KG004";
inline constexpr std::string_view kInvalidValue = "KG005";
inline constexpr std::string_view kDuplicateId = "KG006";
inline constexpr std::string_view kInvalidId = "KG007";
inline constexpr std::string_view kCycle = "KG008";
inline constexpr std::string_view kDuplicateOutput = "KG009";
inline constexpr std::string_view kUnknownGist = "KG010";
inline constexpr std::string_view kDanglingReference = "KG011";
inline constexpr std::string_view kArityMismatch = "KG012";
inline constexpr std::string_view kKindMismatch = "KG013";
inline constexpr std::string_view kOutputNotComputed = "KG014";
inline constexpr std::string_view kComputedWithoutModel = "KG015";
inline constexpr std::string_view kInvalidDefault = "KG016";
inline constexpr std::string_view kRoleMismatch = "KG017";
inline constexpr std::string_view kUnknownFunction = "KG018";
inline constexpr std::string_view kCompletenessStructure = "KG019";
inline constexpr std::string_view kTruthTableMismatch = "KG020";
inline constexpr std::string_view kEnumViolation = "KG021";
inline constexpr std::string_view kUnsupportedVersion = "KG022";
inline constexpr std::string_view kTooManyConditions = "KG023";
inline constexpr std::string_view kUnexpectedText = "KG024";
inline constexpr std::string_view kUnreachableNode = "KG100";
} // namespace codes

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceLocation location;
  // Ids of the fields / models / graphs the diagnostic is about.
  std::vector<std::string> subjects;

  bool is_error() const noexcept { return severity == Severity::Error; }
};

/// "file:line:col: error KG010: message"
std::string format_diagnostic(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

inline std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  return os << format_diagnostic(d);
}

} // namespace kg
