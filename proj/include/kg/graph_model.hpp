#pragma once

#include "kg/diagnostic.hpp"
#include "kg/field_id.hpp"
#include "kg/gist.hpp"
#include "kg/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace kg {

enum class FieldRole { Input, Computed };

std::string_view to_string(FieldRole role);

struct FieldDecl {
  FieldId id;
  ValueKind kind = ValueKind::Money;
  std::vector<std::string> enumeration; // Text kind only
  FieldRole role = FieldRole::Input;
  std::optional<Value> default_value;
  std::string label;
  SourceLocation location;

  /// Label if declared, otherwise the id.
  const std::string& display_name() const { return label.empty() ? id.str() : label; }
  bool admits(const Value& v) const;
};

/// One input slot of a bounded calc model: a field reference or a constant.
struct Binding {
  std::string role; // empty for variadic gists
  std::variant<FieldId, Value> source;
  SourceLocation location;

  const FieldId* field() const { return std::get_if<FieldId>(&source); }
  const Value* constant() const { return std::get_if<Value>(&source); }
};

/// A GIST instance bound to concrete fields on a form.
struct BoundedCalcModel {
  std::string id;
  std::string gist;
  std::string function; // host function name, CALC only
  std::vector<Binding> inputs;
  FieldId output;
  SourceLocation location;
};

enum class Predicate { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(Predicate p);
std::string_view symbol(Predicate p);
std::optional<Predicate> parse_predicate(std::string_view text);

/// Evaluates `value <op> constant`. Throws KindMismatchError (naming `var`)
/// if the two values cannot be compared.
bool evaluate_predicate(const FieldId& var, const Value& value, Predicate op, const Value& constant);

struct ConditionNode {
  FieldId var;
  Predicate op = Predicate::Eq;
  Value constant;
  std::string on_true;
  std::string on_false;
};

struct OutcomeNode {
  std::string decision;
};

struct CompletenessNode {
  std::string id;
  std::variant<ConditionNode, OutcomeNode> body;
  SourceLocation location;

  const ConditionNode* condition() const { return std::get_if<ConditionNode>(&body); }
  const OutcomeNode* outcome() const { return std::get_if<OutcomeNode>(&body); }
};

struct ConditionColumn {
  std::string node_id;
  FieldId var;
  Predicate op = Predicate::Eq;
  Value constant;
};

struct TruthRow {
  std::vector<bool> values; // one per column
  std::string outcome;
};

struct TruthTable {
  std::vector<ConditionColumn> columns;
  std::vector<TruthRow> rows;
  SourceLocation location;
};

struct CompletenessGraph {
  std::string id;
  std::string start;
  std::vector<CompletenessNode> nodes;
  std::optional<TruthTable> truth_table;
  SourceLocation location;

  const CompletenessNode* node(std::string_view node_id) const;
};

/// Largest number of condition nodes a completeness graph may carry.
inline constexpr std::size_t kMaxConditions = 16;

/// Enumerates every combination of the reachable conditions (2^k rows).
/// Columns are the condition nodes in pre-order from start, true edge first;
/// the first column varies fastest and True precedes False. Requires a
/// structurally valid graph.
TruthTable derive_truth_table(const CompletenessGraph& cg);

/// Follows the graph from start using one truth value per column of `columns`.
std::string walk(const CompletenessGraph& cg, std::span<const ConditionColumn> columns,
                 const std::vector<bool>& values);

/// Plain, mutable graph description as authored or loaded.
struct GraphDefinition {
  std::string id;
  std::vector<FieldDecl> fields;
  std::vector<BoundedCalcModel> calcs;
  std::vector<CompletenessGraph> completeness;
};

/// All invariant violations of `def`; empty iff the graph is well formed.
std::vector<Diagnostic> validate(const GraphDefinition& def,
                                 const GistRegistry& gists = GistRegistry::builtin(),
                                 const FunctionTable& functions = FunctionTable::standard());

/// Kind / role / arity checks for one model against field declarations.
/// Shared with the instruction compiler.
std::vector<Diagnostic> check_model(const BoundedCalcModel& model, const GistRegistry& gists,
                                    const FunctionTable& functions,
                                    const std::unordered_map<FieldId, const FieldDecl*>& fields);

/// Model ids such that every model follows the producers of its inputs; ties
/// go to the smaller id. Throws CycleError on a cyclic definition.
std::vector<std::string> topo_order(const GraphDefinition& def);

using FieldIndex = std::uint32_t;
using ModelIndex = std::uint32_t;

class KnowledgeGraph;

struct BuildResult {
  std::shared_ptr<const KnowledgeGraph> graph; // null when diagnostics carry errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return graph != nullptr; }
};

/// Immutable, validated knowledge graph with dependency indexes. Fields,
/// calc models and completeness graphs are ordered by id, so indexes follow
/// id order.
class KnowledgeGraph : public std::enable_shared_from_this<KnowledgeGraph> {
public:
  static BuildResult build(GraphDefinition def, const GistRegistry& gists = GistRegistry::builtin(),
                           const FunctionTable& functions = FunctionTable::standard());

  KnowledgeGraph(const KnowledgeGraph&) = delete;
  KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;

  const std::string& id() const noexcept { return def_.id; }
  /// Canonical definition: sorted by id, truth tables derived.
  const GraphDefinition& definition() const noexcept { return def_; }

  std::size_t field_count() const noexcept { return def_.fields.size(); }
  std::size_t model_count() const noexcept { return def_.calcs.size(); }

  std::optional<FieldIndex> find_field(const FieldId& id) const;
  /// Throws UnknownFieldError.
  FieldIndex field_index(const FieldId& id) const;
  const FieldDecl& field(FieldIndex i) const { return def_.fields[i]; }
  std::span<const FieldDecl> fields() const noexcept { return def_.fields; }

  const BoundedCalcModel& model(ModelIndex m) const { return def_.calcs[m]; }
  std::span<const BoundedCalcModel> models() const noexcept { return def_.calcs; }
  std::optional<ModelIndex> find_model(std::string_view id) const;

  const GistSpec& gist(ModelIndex m) const { return gists_.at(m); }
  const HostFunction* function(ModelIndex m) const { return functions_.at(m); }

  /// Resolved input slot: a field index or a constant.
  struct Slot {
    std::optional<FieldIndex> field;
    Value constant;
  };
  std::span<const Slot> slots(ModelIndex m) const { return slots_[m]; }
  /// For fixed-arity gists: slot index of each declared role, in role order.
  std::span<const std::size_t> role_slots(ModelIndex m) const { return role_slots_[m]; }
  FieldIndex output(ModelIndex m) const { return outputs_[m]; }

  std::optional<ModelIndex> producer(FieldIndex f) const { return producer_[f]; }
  /// Dependency index: models consuming field `f`, ascending.
  std::span<const ModelIndex> consumers(FieldIndex f) const { return consumers_[f]; }

  std::span<const ModelIndex> topo_order() const noexcept { return topo_; }
  std::size_t topo_position(ModelIndex m) const { return topo_pos_[m]; }

  std::span<const CompletenessGraph> completeness_graphs() const noexcept { return def_.completeness; }
  const CompletenessGraph* find_completeness(std::string_view id) const;

  const GistRegistry& gist_registry() const noexcept { return gist_registry_; }
  const FunctionTable& function_table() const noexcept { return function_table_; }

private:
  KnowledgeGraph() = default;

  GraphDefinition def_;
  GistRegistry gist_registry_;
  FunctionTable function_table_;
  std::unordered_map<FieldId, FieldIndex> field_index_;
  std::unordered_map<std::string, ModelIndex> model_index_;
  std::vector<GistSpec> gists_;
  std::vector<const HostFunction*> functions_;
  std::vector<std::vector<Slot>> slots_;
  std::vector<std::vector<std::size_t>> role_slots_;
  std::vector<FieldIndex> outputs_;
  std::vector<std::optional<ModelIndex>> producer_;
  std::vector<std::vector<ModelIndex>> consumers_;
  std::vector<ModelIndex> topo_;
  std::vector<std::size_t> topo_pos_;
};

} // namespace kg
