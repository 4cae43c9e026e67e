#include "kg/engine.hpp"

#include <algorithm>
#include <deque>

namespace kg {

const Value* FactStore::find(const FieldId& field) const {
  auto it = facts_.find(field);
  return it == facts_.end() ? nullptr : &it->second;
}

void FactStore::check(const KnowledgeGraph& graph, const FieldId& field, const std::optional<Value>& value) {
  const auto& decl = graph.field(graph.field_index(field));
  if (decl.role != FieldRole::Input) {
    throw NotAnInputError(field);
  }
  if (!value) {
    return;
  }
  if (value->is_unknown()) {
    throw KindMismatchError(field, "facts cannot be unknown; retract instead");
  }
  if (value->kind() != decl.kind) {
    throw KindMismatchError(field, "expected " + std::string(to_string(decl.kind)) + ", got " +
                                       std::string(to_string(*value->kind())));
  }
  if (!decl.admits(*value)) {
    throw KindMismatchError(field, "'" + value->to_string() + "' is not in the enumeration");
  }
}

EvalState::EvalState(const KnowledgeGraph& graph)
    : graph_(&graph),
      values_(graph.field_count()),
      errors_(graph.model_count()),
      eval_count_(graph.model_count(), 0),
      dirty_(graph.field_count(), 0) {}

std::vector<FieldId> EvalState::dirty() const {
  std::vector<FieldId> out;
  out.reserve(dirty_list_.size());
  for (auto f : dirty_list_) {
    out.push_back(graph_->field(f).id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t EvalState::eval_count(std::string_view model_id) const {
  if (auto m = graph_->find_model(model_id)) {
    return eval_count_[*m];
  }
  return 0;
}

EvalResult::EvalResult(std::shared_ptr<const KnowledgeGraph> graph, std::vector<Value> values,
                       std::vector<ModelError> errors, std::uint64_t revision)
    : graph_(std::move(graph)), values_(std::move(values)), errors_(std::move(errors)), revision_(revision) {}

const Value& EvalResult::value(const FieldId& field) const { return values_[graph_->field_index(field)]; }

std::map<FieldId, Value> EvalResult::values() const {
  std::map<FieldId, Value> out;
  for (FieldIndex i = 0; i < values_.size(); ++i) {
    out.emplace_hint(out.end(), graph_->field(i).id, values_[i]);
  }
  return out;
}

std::vector<FieldId> EvalResult::unknown_fields() const {
  std::vector<FieldId> out;
  for (FieldIndex i = 0; i < values_.size(); ++i) {
    const auto& decl = graph_->field(i);
    if (decl.role == FieldRole::Computed && values_[i].is_unknown()) {
      out.push_back(decl.id);
    }
  }
  return out;
}

namespace {

struct Outcome {
  Value value;
  std::optional<EvalError> error;
};

Outcome fail(EvalErrorCode code, std::string message) { return {Value{}, EvalError{code, std::move(message)}}; }

Outcome store_numeric(const std::optional<Decimal>& exact, const FieldDecl& out) {
  if (!exact) {
    return fail(EvalErrorCode::Overflow, "arithmetic overflow");
  }
  if (auto v = assign_numeric(*exact, out.kind)) {
    return {std::move(*v), std::nullopt};
  }
  return fail(EvalErrorCode::Overflow, "result does not fit " + out.id.str());
}

// Stores a value produced by CONDITIONAL or a host function into `out`.
Outcome store_value(const Value& v, const FieldDecl& out) {
  if (v.is_unknown()) {
    return {};
  }
  if (v.is_numeric() && is_numeric(out.kind)) {
    return store_numeric(v.as_decimal(), out);
  }
  if (v.kind() != out.kind) {
    return fail(EvalErrorCode::KindMismatch,
                std::string(to_string(*v.kind())) + " value cannot be stored in " + out.id.str());
  }
  if (!out.admits(v)) {
    return fail(EvalErrorCode::EnumMismatch, "'" + v.to_string() + "' is not in the enumeration of " + out.id.str());
  }
  return {v, std::nullopt};
}

Outcome execute(const KnowledgeGraph& g, ModelIndex m, const std::vector<Value>& values) {
  const auto slots = g.slots(m);
  std::vector<const Value*> args;
  args.reserve(slots.size());
  for (const auto& s : slots) {
    const Value* v = s.field ? &values[*s.field] : &s.constant;
    if (v->is_unknown()) {
      return {};
    }
    args.push_back(v);
  }
  const auto& out = g.field(g.output(m));
  const auto& gist = g.gist(m);
  const auto roles = g.role_slots(m);

  switch (gist.semantics) {
  case GistSemantics::Add: {
    std::optional<Decimal> acc = Decimal::zero();
    for (const auto* a : args) {
      if (acc) {
        acc = acc->plus(a->as_decimal());
      }
    }
    return store_numeric(acc, out);
  }
  case GistSemantics::Multiply: {
    std::optional<Decimal> acc = Decimal{1, 0};
    for (const auto* a : args) {
      if (acc) {
        acc = acc->times(a->as_decimal());
      }
    }
    return store_numeric(acc, out);
  }
  case GistSemantics::Subtract:
  case GistSemantics::NonnegSubtract: {
    auto diff = args[roles[0]]->as_decimal().minus(args[roles[1]]->as_decimal());
    if (diff && gist.semantics == GistSemantics::NonnegSubtract && diff->is_negative()) {
      diff = Decimal::zero();
    }
    return store_numeric(diff, out);
  }
  case GistSemantics::Min:
  case GistSemantics::Max: {
    const bool want_min = gist.semantics == GistSemantics::Min;
    Decimal best = args.front()->as_decimal();
    for (const auto* a : args) {
      const auto d = a->as_decimal();
      const int c = d.compare(best);
      if (want_min ? c < 0 : c > 0) {
        best = d;
      }
    }
    return store_numeric(best, out);
  }
  case GistSemantics::Conditional: {
    const bool cond = args[roles[0]]->as_bool();
    return store_value(*args[cond ? roles[1] : roles[2]], out);
  }
  case GistSemantics::Calc: {
    const auto* fn = g.function(m);
    std::vector<Value> owned;
    owned.reserve(args.size());
    for (const auto* a : args) {
      owned.push_back(*a);
    }
    try {
      return store_value(fn->fn(owned), out);
    } catch (const EvalFailure& e) {
      return fail(e.code(), e.what());
    } catch (const std::exception& e) {
      return fail(EvalErrorCode::HostFailure, e.what());
    }
  }
  }
  return fail(EvalErrorCode::HostFailure, "unsupported gist " + gist.name);
}

Value effective_input(const FieldDecl& decl, const FactStore& store) {
  if (const auto* fact = store.find(decl.id)) {
    return *fact;
  }
  if (decl.default_value) {
    return *decl.default_value;
  }
  return {};
}

} // namespace

void set_fact(const KnowledgeGraph& graph, FactStore& store, EvalState& state, const FieldId& field,
              std::optional<Value> value) {
  FactStore::check(graph, field, value);
  if (value) {
    store.facts_[field] = std::move(*value);
  } else {
    store.facts_.erase(field);
  }
  ++store.revision_;

  const auto start = graph.field_index(field);
  state.pending_inputs_.push_back(start);
  // Dirty sets are closed downstream, so an already-dirty field's cone is
  // already marked.
  std::deque<FieldIndex> queue{start};
  while (!queue.empty()) {
    const auto f = queue.front();
    queue.pop_front();
    for (auto m : graph.consumers(f)) {
      const auto out = graph.output(m);
      if (!state.dirty_[out]) {
        state.dirty_[out] = 1;
        state.dirty_list_.push_back(out);
        queue.push_back(out);
      }
    }
  }
}

EvalResult recompute(const KnowledgeGraph& graph, const FactStore& store, EvalState& state) {
  auto run = [&](ModelIndex m) {
    auto outcome = execute(graph, m, state.values_);
    state.values_[graph.output(m)] = std::move(outcome.value);
    state.errors_[m] = std::move(outcome.error);
    ++state.eval_count_[m];
    ++state.total_evals_;
  };

  if (!state.primed_) {
    for (FieldIndex f = 0; f < graph.field_count(); ++f) {
      if (graph.field(f).role == FieldRole::Input) {
        state.values_[f] = effective_input(graph.field(f), store);
      }
    }
    for (auto m : graph.topo_order()) {
      run(m);
    }
    state.primed_ = true;
  } else {
    for (auto f : state.pending_inputs_) {
      state.values_[f] = effective_input(graph.field(f), store);
    }
    std::vector<ModelIndex> models;
    models.reserve(state.dirty_list_.size());
    for (auto f : state.dirty_list_) {
      models.push_back(*graph.producer(f));
    }
    std::sort(models.begin(), models.end(),
              [&](ModelIndex a, ModelIndex b) { return graph.topo_position(a) < graph.topo_position(b); });
    for (auto m : models) {
      run(m);
    }
  }
  for (auto f : state.dirty_list_) {
    state.dirty_[f] = 0;
  }
  state.dirty_list_.clear();
  state.pending_inputs_.clear();
  state.revision_ = store.revision();

  std::vector<ModelError> errors;
  for (ModelIndex m = 0; m < graph.model_count(); ++m) {
    if (state.errors_[m]) {
      errors.push_back({graph.model(m).id, *state.errors_[m]});
    }
  }
  return EvalResult(graph.shared_from_this(), state.values_, std::move(errors), store.revision());
}

EvalResult full_eval(const KnowledgeGraph& graph, const FactStore& store) {
  EvalState state(graph);
  return recompute(graph, store, state);
}

std::vector<FieldId> dependency_cone(const KnowledgeGraph& graph, const FieldId& field) {
  std::vector<char> seen(graph.field_count(), 0);
  std::deque<FieldIndex> queue{graph.field_index(field)};
  std::vector<FieldId> out;
  while (!queue.empty()) {
    const auto f = queue.front();
    queue.pop_front();
    for (auto m : graph.consumers(f)) {
      const auto o = graph.output(m);
      if (!seen[o]) {
        seen[o] = 1;
        out.push_back(graph.field(o).id);
        queue.push_back(o);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace kg
