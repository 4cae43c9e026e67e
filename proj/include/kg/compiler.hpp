#pragma once

#include "kg/graph_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kg {

/// One form-line instruction as extracted from a form.
struct InstructionLine {
  std::string form;
  std::string line; // e.g. "19", "18e"
  std::string text;

  friend bool operator==(const InstructionLine&, const InstructionLine&) = default;
};

/// Fixed registry of reasons a line can fail to compile.
namespace reasons {
inline constexpr std::string_view kNoOperationTerm = "no operation term";
inline constexpr std::string_view kUnknownOperation = "unknown operation";
inline constexpr std::string_view kAmbiguousOperands = "ambiguous operands";
inline constexpr std::string_view kUnresolvedReference = "unresolved reference";
inline constexpr std::string_view kInvalidRange = "invalid range";
inline constexpr std::string_view kKindMismatch = "kind mismatch";
inline constexpr std::string_view kRejectedByValidation = "rejected by validation";
} // namespace reasons

struct Unmatched {
  std::string reason; // one of reasons::*
  std::string detail;

  friend bool operator==(const Unmatched&, const Unmatched&) = default;
};

using Operand = std::variant<FieldId, Value>;

struct RangeRef {
  FieldId from;
  FieldId to;

  friend bool operator==(const RangeRef&, const RangeRef&) = default;
};

struct TermSet {
  FieldId output;
  std::vector<std::string> operation_terms; // lexicon entries in text order
  std::vector<Operand> operands;            // references (ranges expanded) and constants in text order
  std::vector<FieldId> input_refs;
  std::vector<Value> constants;
  std::vector<RangeRef> ranges;

  friend bool operator==(const TermSet&, const TermSet&) = default;
};

enum class Confidence { Exact, Heuristic };

std::string_view to_string(Confidence c);

struct Matched {
  BoundedCalcModel model;
  std::string gist;
  std::string pattern;
  Confidence confidence = Confidence::Exact;
};

using CompileOutcome = std::variant<Matched, Unmatched>;

/// Term lexicon and operation patterns, normally read from
/// data/instruction_patterns.json (embedded at build time).
class PatternTable {
public:
  struct OperandCount {
    std::size_t min = 0;
    std::optional<std::size_t> max;
  };
  struct Pattern {
    std::string name;
    std::vector<std::string> terms;
    std::string gist;
    OperandCount operands;
    std::map<std::string, std::size_t> roles; // empty: bind every operand in order
    std::vector<std::size_t> zero;            // operands that must be the constant 0
    std::vector<std::pair<std::size_t, std::size_t>> same;
    Confidence confidence = Confidence::Exact;
  };

  static const PatternTable& builtin();
  /// Throws std::runtime_error on malformed input.
  static PatternTable parse(std::string_view json_text);
  static PatternTable load(const std::filesystem::path& path);

  const std::vector<std::string>& verbs() const noexcept { return verbs_; }
  /// Lexicon entries longest first, for greedy matching.
  const std::vector<std::string>& terms_by_length() const noexcept { return terms_by_length_; }
  bool is_verb(std::string_view term) const;
  bool is_unsupported(std::string_view term) const;
  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }

private:
  std::vector<std::string> verbs_;
  std::vector<std::string> connectives_;
  std::vector<std::string> unsupported_;
  std::vector<std::string> terms_by_length_;
  std::vector<Pattern> patterns_;
};

/// Rule-based term extraction. `fields` are the declarations of every form
/// the corpus may reference.
std::variant<TermSet, Unmatched> extract_terms(const InstructionLine& line, std::span<const FieldDecl> fields,
                                               const PatternTable& patterns = PatternTable::builtin());

CompileOutcome match_gist(const TermSet& terms, const GistRegistry& registry = GistRegistry::builtin(),
                          const PatternTable& patterns = PatternTable::builtin());

enum class LineStatus { Matched, NotCalculation, Unmatched };

std::string_view to_string(LineStatus s);

struct LineResult {
  InstructionLine line;
  LineStatus status = LineStatus::NotCalculation;
  std::optional<Matched> matched;
  std::optional<Unmatched> unmatched; // for NotCalculation: why it is not one
};

struct CompileResult {
  std::vector<LineResult> lines; // corpus order
  GraphDefinition fragment;      // declared fields plus matched models; passes validate
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::size_t not_calculation = 0;

  /// matched / (matched + unmatched); std::nullopt without calculation lines.
  std::optional<double> automation_rate() const;
};

/// Compiles a corpus against field declarations. Lines without any operation
/// verb are not calculations and stay out of the rate.
CompileResult compile_form(const std::vector<InstructionLine>& lines, std::span<const FieldDecl> fields,
                           const GistRegistry& registry = GistRegistry::builtin(),
                           const PatternTable& patterns = PatternTable::builtin());

/// Parses `form<TAB>line<TAB>text` records. Blank lines and lines starting
/// with '#' are skipped. Throws std::runtime_error naming the bad line.
std::vector<InstructionLine> parse_corpus_tsv(std::string_view text);

/// Rate as "0.80", or "n/a".
std::string format_rate(const std::optional<double>& rate);

/// Machine-readable report (JSON) and a fixed-width table for humans.
std::string report_json(const CompileResult& result);
std::string report_table(const CompileResult& result);

} // namespace kg
