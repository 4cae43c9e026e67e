#pragma once

#include "kg/engine.hpp"
#include "kg/graph_model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kg {

struct Decided {
  std::string decision;

  friend bool operator==(const Decided&, const Decided&) = default;
};

struct Incomplete {
  std::vector<std::size_t> live_rows; // indexes into the truth table, ascending
  std::vector<FieldId> relevant;      // sorted

  friend bool operator==(const Incomplete&, const Incomplete&) = default;
};

using CompletenessStatus = std::variant<Decided, Incomplete>;

/// Returns the known value of a field, or nullptr while it is unknown.
using ValueLookup = std::function<const Value*(const FieldId&)>;

/// Prunes the truth table of `cg` with the known values: a known variable
/// fixes every column it appears in. Throws KindMismatchError when a known
/// value cannot be compared with a condition constant.
CompletenessStatus assess(const CompletenessGraph& cg, const ValueLookup& lookup);
CompletenessStatus assess(const CompletenessGraph& cg, const FactStore& facts);
CompletenessStatus assess(const CompletenessGraph& cg, const std::map<FieldId, Value>& facts);
/// Uses effective values: facts, defaults and known computed fields.
CompletenessStatus assess(const CompletenessGraph& cg, const EvalResult& eval);

/// Picks the next variable to ask about among the relevant ones.
class QuestionStrategy {
public:
  virtual ~QuestionStrategy() = default;
  virtual std::optional<FieldId> choose(const TruthTable& table, const Incomplete& status) const = 0;
};

/// Minimizes the worst-case number of live rows left after the answer;
/// ties go to the smaller FieldId.
class MinimaxStrategy : public QuestionStrategy {
public:
  std::optional<FieldId> choose(const TruthTable& table, const Incomplete& status) const override;
};

const QuestionStrategy& default_question_strategy();

std::optional<FieldId> next_question(const CompletenessGraph& cg, const CompletenessStatus& status,
                                     const QuestionStrategy& strategy = default_question_strategy());
std::optional<FieldId> next_question(const CompletenessGraph& cg, const FactStore& facts,
                                     const QuestionStrategy& strategy = default_question_strategy());
std::optional<FieldId> next_question(const CompletenessGraph& cg, const std::map<FieldId, Value>& facts,
                                     const QuestionStrategy& strategy = default_question_strategy());

struct CompletenessEntry {
  std::string graph_id;
  CompletenessStatus status;
  std::optional<FieldId> next_question;

  friend bool operator==(const CompletenessEntry&, const CompletenessEntry&) = default;
};

struct MissingInputs {
  FieldId field;               // an Unknown computed field
  std::vector<FieldId> inputs; // absent, undefaulted inputs it depends on, sorted

  friend bool operator==(const MissingInputs&, const MissingInputs&) = default;
};

struct MissingReport {
  std::vector<CompletenessEntry> completeness; // by graph id
  std::vector<MissingInputs> missing;          // by field id
  std::vector<ModelError> errors;

  /// Nothing to ask and nothing wrong.
  bool empty() const;

  friend bool operator==(const MissingReport&, const MissingReport&) = default;
};

MissingReport missing_report(const KnowledgeGraph& graph, const FactStore& facts, const EvalResult& eval);

/// Absent, undefaulted inputs in the backward closure of `field`, sorted.
std::vector<FieldId> missing_inputs(const KnowledgeGraph& graph, const FactStore& facts, const FieldId& field);

} // namespace kg
