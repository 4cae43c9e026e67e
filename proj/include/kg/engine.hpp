#pragma once

#include "kg/errors.hpp"
#include "kg/graph_model.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kg {

class EvalState;
class EvalResult;

/// Input facts for one session. Absence of a fact means Unknown.
class FactStore {
public:
  const std::map<FieldId, Value>& facts() const noexcept { return facts_; }
  const Value* find(const FieldId& field) const;
  std::uint64_t revision() const noexcept { return revision_; }

  /// Checks that `value` may be stored for `field`; throws UnknownFieldError,
  /// NotAnInputError or KindMismatchError. Absent (std::nullopt) always passes
  /// for input fields.
  static void check(const KnowledgeGraph& graph, const FieldId& field, const std::optional<Value>& value);

  friend bool operator==(const FactStore&, const FactStore&) = default;

private:
  friend void set_fact(const KnowledgeGraph&, FactStore&, EvalState&, const FieldId&, std::optional<Value>);

  std::map<FieldId, Value> facts_;
  std::uint64_t revision_ = 0;
};

struct ModelError {
  std::string model_id;
  EvalError error;

  friend bool operator==(const ModelError&, const ModelError&) = default;
};

/// Incremental bookkeeping for one session.
class EvalState {
public:
  explicit EvalState(const KnowledgeGraph& graph);

  /// Computed fields awaiting recomputation, sorted.
  std::vector<FieldId> dirty() const;
  std::uint64_t eval_count(std::string_view model_id) const;
  std::uint64_t total_evaluations() const noexcept { return total_evals_; }
  std::uint64_t revision() const noexcept { return revision_; }
  /// False until the first recompute has evaluated every model.
  bool primed() const noexcept { return primed_; }

  friend bool operator==(const EvalState&, const EvalState&) = default;

private:
  friend void set_fact(const KnowledgeGraph&, FactStore&, EvalState&, const FieldId&, std::optional<Value>);
  friend EvalResult recompute(const KnowledgeGraph&, const FactStore&, EvalState&);

  const KnowledgeGraph* graph_;
  std::vector<Value> values_;               // by field index; inputs hold their effective value
  std::vector<std::optional<EvalError>> errors_; // by model index
  std::vector<std::uint64_t> eval_count_;   // by model index
  std::vector<char> dirty_;                 // by field index, computed fields only
  std::vector<FieldIndex> dirty_list_;
  std::vector<FieldIndex> pending_inputs_;
  std::uint64_t revision_ = 0;
  std::uint64_t total_evals_ = 0;
  bool primed_ = false;
};

/// Immutable evaluation snapshot.
class EvalResult {
public:
  EvalResult(std::shared_ptr<const KnowledgeGraph> graph, std::vector<Value> values, std::vector<ModelError> errors,
             std::uint64_t revision);

  const KnowledgeGraph& graph() const noexcept { return *graph_; }
  /// Value of any field: computed result, or an input's fact / default.
  /// Throws UnknownFieldError.
  const Value& value(const FieldId& field) const;
  const Value& value(FieldIndex field) const { return values_[field]; }
  /// Snapshot of every field, sorted by id.
  std::map<FieldId, Value> values() const;
  /// Computed fields whose value is Unknown, sorted.
  std::vector<FieldId> unknown_fields() const;
  /// Current evaluation errors, sorted by model id.
  const std::vector<ModelError>& errors() const noexcept { return errors_; }
  std::uint64_t revision() const noexcept { return revision_; }

  friend bool operator==(const EvalResult& a, const EvalResult& b) {
    return a.graph_ == b.graph_ && a.values_ == b.values_ && a.errors_ == b.errors_ && a.revision_ == b.revision_;
  }

private:
  std::shared_ptr<const KnowledgeGraph> graph_;
  std::vector<Value> values_;
  std::vector<ModelError> errors_;
  std::uint64_t revision_;
};

/// Stores (or, with std::nullopt, retracts) a fact and marks the dependency
/// cone of `field` dirty. Throws UnknownFieldError, NotAnInputError or
/// KindMismatchError without changing anything.
void set_fact(const KnowledgeGraph& graph, FactStore& store, EvalState& state, const FieldId& field,
              std::optional<Value> value);

/// Executes, in topological order, exactly the models whose output is dirty.
EvalResult recompute(const KnowledgeGraph& graph, const FactStore& store, EvalState& state);

/// From-scratch evaluation of every model.
EvalResult full_eval(const KnowledgeGraph& graph, const FactStore& store);

/// Computed fields transitively downstream of `field`, sorted.
std::vector<FieldId> dependency_cone(const KnowledgeGraph& graph, const FieldId& field);

} // namespace kg
