#include "kg/completeness.hpp"

#include <algorithm>
#include <set>

namespace kg {

namespace {

const TruthTable& table_of(const CompletenessGraph& cg, std::optional<TruthTable>& scratch) {
  if (cg.truth_table) {
    return *cg.truth_table;
  }
  scratch = derive_truth_table(cg);
  return *scratch;
}

// Columns of `table` grouped by the variable they test.
std::map<FieldId, std::vector<std::size_t>> columns_by_var(const TruthTable& table) {
  std::map<FieldId, std::vector<std::size_t>> out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out[table.columns[c].var].push_back(c);
  }
  return out;
}

} // namespace

CompletenessStatus assess(const CompletenessGraph& cg, const ValueLookup& lookup) {
  std::optional<TruthTable> scratch;
  const auto& table = table_of(cg, scratch);
  const std::size_t k = table.columns.size();

  std::vector<std::optional<bool>> fixed(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& col = table.columns[c];
    if (const Value* v = lookup(col.var); v != nullptr && !v->is_unknown()) {
      fixed[c] = evaluate_predicate(col.var, *v, col.op, col.constant);
    }
  }

  Incomplete live;
  std::set<std::string> outcomes;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool match = true;
    for (std::size_t c = 0; c < k && match; ++c) {
      match = !fixed[c] || *fixed[c] == row.values[c];
    }
    if (match) {
      live.live_rows.push_back(r);
      outcomes.insert(row.outcome);
    }
  }
  if (outcomes.size() == 1) {
    return Decided{*outcomes.begin()};
  }

  // A variable is relevant iff two live rows that agree everywhere outside
  // its columns reach different outcomes.
  for (const auto& [var, cols] : columns_by_var(table)) {
    if (fixed[cols.front()]) {
      continue;
    }
    std::map<std::vector<bool>, std::string> seen;
    bool relevant = false;
    for (auto r : live.live_rows) {
      auto key = table.rows[r].values;
      for (auto c : cols) {
        key[c] = false;
      }
      auto [it, inserted] = seen.emplace(std::move(key), table.rows[r].outcome);
      if (!inserted && it->second != table.rows[r].outcome) {
        relevant = true;
        break;
      }
    }
    if (relevant) {
      live.relevant.push_back(var);
    }
  }
  return live;
}

CompletenessStatus assess(const CompletenessGraph& cg, const FactStore& facts) {
  return assess(cg, [&](const FieldId& f) { return facts.find(f); });
}

CompletenessStatus assess(const CompletenessGraph& cg, const std::map<FieldId, Value>& facts) {
  return assess(cg, [&](const FieldId& f) -> const Value* {
    auto it = facts.find(f);
    return it == facts.end() ? nullptr : &it->second;
  });
}

CompletenessStatus assess(const CompletenessGraph& cg, const EvalResult& eval) {
  const auto& graph = eval.graph();
  return assess(cg, [&](const FieldId& f) -> const Value* {
    auto i = graph.find_field(f);
    return i ? &eval.value(*i) : nullptr;
  });
}

std::optional<FieldId> MinimaxStrategy::choose(const TruthTable& table, const Incomplete& status) const {
  const auto by_var = columns_by_var(table);
  std::optional<FieldId> best;
  std::size_t best_worst = 0;
  for (const auto& var : status.relevant) {
    const auto& cols = by_var.at(var);
    std::map<std::vector<bool>, std::size_t> groups;
    for (auto r : status.live_rows) {
      std::vector<bool> key;
      key.reserve(cols.size());
      for (auto c : cols) {
        key.push_back(table.rows[r].values[c]);
      }
      ++groups[key];
    }
    std::size_t worst = 0;
    for (const auto& [key, n] : groups) {
      worst = std::max(worst, n);
    }
    // `relevant` is sorted, so strict improvement keeps the smaller id on ties.
    if (!best || worst < best_worst) {
      best = var;
      best_worst = worst;
    }
  }
  return best;
}

const QuestionStrategy& default_question_strategy() {
  static const MinimaxStrategy strategy;
  return strategy;
}

std::optional<FieldId> next_question(const CompletenessGraph& cg, const CompletenessStatus& status,
                                     const QuestionStrategy& strategy) {
  const auto* incomplete = std::get_if<Incomplete>(&status);
  if (incomplete == nullptr) {
    return std::nullopt;
  }
  std::optional<TruthTable> scratch;
  return strategy.choose(table_of(cg, scratch), *incomplete);
}

std::optional<FieldId> next_question(const CompletenessGraph& cg, const FactStore& facts,
                                     const QuestionStrategy& strategy) {
  return next_question(cg, assess(cg, facts), strategy);
}

std::optional<FieldId> next_question(const CompletenessGraph& cg, const std::map<FieldId, Value>& facts,
                                     const QuestionStrategy& strategy) {
  return next_question(cg, assess(cg, facts), strategy);
}

bool MissingReport::empty() const {
  return missing.empty() && errors.empty() &&
         std::all_of(completeness.begin(), completeness.end(),
                     [](const CompletenessEntry& e) { return !e.next_question; });
}

std::vector<FieldId> missing_inputs(const KnowledgeGraph& graph, const FactStore& facts, const FieldId& field) {
  std::vector<char> seen(graph.field_count(), 0);
  std::vector<FieldIndex> stack{graph.field_index(field)};
  seen[stack.back()] = 1;
  std::vector<FieldId> out;
  while (!stack.empty()) {
    const auto f = stack.back();
    stack.pop_back();
    const auto& decl = graph.field(f);
    if (auto m = graph.producer(f)) {
      for (const auto& slot : graph.slots(*m)) {
        if (slot.field && !seen[*slot.field]) {
          seen[*slot.field] = 1;
          stack.push_back(*slot.field);
        }
      }
    } else if (!decl.default_value && facts.find(decl.id) == nullptr) {
      out.push_back(decl.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

MissingReport missing_report(const KnowledgeGraph& graph, const FactStore& facts, const EvalResult& eval) {
  MissingReport report;
  for (const auto& cg : graph.completeness_graphs()) {
    auto status = assess(cg, eval);
    auto question = next_question(cg, status);
    report.completeness.push_back({cg.id, std::move(status), std::move(question)});
  }
  for (const auto& field : eval.unknown_fields()) {
    auto inputs = missing_inputs(graph, facts, field);
    if (!inputs.empty()) {
      report.missing.push_back({field, std::move(inputs)});
    }
  }
  report.errors = eval.errors();
  return report;
}

} // namespace kg
