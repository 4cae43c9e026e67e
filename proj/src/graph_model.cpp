#include "kg/graph_model.hpp"
#include "kg/errors.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace kg {

std::string_view to_string(FieldRole role) { return role == FieldRole::Input ? "input" : "computed"; }

bool FieldDecl::admits(const Value& v) const {
  if (v.is_unknown() || v.kind() != kind) {
    return false;
  }
  if (kind == ValueKind::Text) {
    return std::find(enumeration.begin(), enumeration.end(), v.as_text()) != enumeration.end();
  }
  return true;
}

std::string_view to_string(Predicate p) {
  switch (p) {
  case Predicate::Eq:
    return "eq";
  case Predicate::Ne:
    return "ne";
  case Predicate::Lt:
    return "lt";
  case Predicate::Le:
    return "le";
  case Predicate::Gt:
    return "gt";
  case Predicate::Ge:
    return "ge";
  }
  return "?";
}

std::string_view symbol(Predicate p) {
  switch (p) {
  case Predicate::Eq:
    return "==";
  case Predicate::Ne:
    return "!=";
  case Predicate::Lt:
    return "<";
  case Predicate::Le:
    return "<=";
  case Predicate::Gt:
    return ">";
  case Predicate::Ge:
    return ">=";
  }
  return "?";
}

std::optional<Predicate> parse_predicate(std::string_view text) {
  for (auto p : {Predicate::Eq, Predicate::Ne, Predicate::Lt, Predicate::Le, Predicate::Gt, Predicate::Ge}) {
    if (to_string(p) == text) {
      return p;
    }
  }
  return std::nullopt;
}

namespace {

bool is_ordering(Predicate p) { return p != Predicate::Eq && p != Predicate::Ne; }

bool apply(Predicate op, int cmp) {
  switch (op) {
  case Predicate::Eq:
    return cmp == 0;
  case Predicate::Ne:
    return cmp != 0;
  case Predicate::Lt:
    return cmp < 0;
  case Predicate::Le:
    return cmp <= 0;
  case Predicate::Gt:
    return cmp > 0;
  case Predicate::Ge:
    return cmp >= 0;
  }
  return false;
}

} // namespace

bool evaluate_predicate(const FieldId& var, const Value& value, Predicate op, const Value& constant) {
  if (value.is_numeric() && constant.is_numeric()) {
    return apply(op, value.as_decimal().compare(constant.as_decimal()));
  }
  if (value.kind() == constant.kind() && value.kind() && !is_ordering(op)) {
    return apply(op, value == constant ? 0 : 1);
  }
  throw KindMismatchError(var, "cannot compare " + value.to_string() + " " + std::string(symbol(op)) + " " +
                                   constant.to_string());
}

const CompletenessNode* CompletenessGraph::node(std::string_view node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) {
      return &n;
    }
  }
  return nullptr;
}

TruthTable derive_truth_table(const CompletenessGraph& cg) {
  TruthTable table;
  std::unordered_set<std::string> seen;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (!seen.insert(id).second) {
      return;
    }
    const auto* n = cg.node(id);
    if (n == nullptr) {
      throw std::logic_error("dangling completeness node " + id);
    }
    if (const auto* c = n->condition()) {
      table.columns.push_back({n->id, c->var, c->op, c->constant});
      visit(c->on_true);
      visit(c->on_false);
    }
  };
  visit(cg.start);
  const std::size_t k = table.columns.size();
  if (k > kMaxConditions) {
    throw std::logic_error("too many conditions in " + cg.id);
  }
  const std::size_t n_rows = std::size_t{1} << k;
  table.rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    TruthRow row;
    row.values.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      row.values[c] = ((i >> c) & 1U) == 0;
    }
    row.outcome = walk(cg, table.columns, row.values);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string walk(const CompletenessGraph& cg, std::span<const ConditionColumn> columns,
                 const std::vector<bool>& values) {
  std::string current = cg.start;
  // A valid graph is a DAG, so a path never exceeds the node count.
  for (std::size_t steps = 0; steps <= cg.nodes.size(); ++steps) {
    const auto* n = cg.node(current);
    if (n == nullptr) {
      throw std::logic_error("dangling completeness node " + current);
    }
    if (const auto* o = n->outcome()) {
      return o->decision;
    }
    auto col = std::find_if(columns.begin(), columns.end(),
                            [&](const ConditionColumn& c) { return c.node_id == n->id; });
    if (col == columns.end()) {
      throw std::logic_error("no truth-table column for condition " + n->id);
    }
    const bool truth = values.at(static_cast<std::size_t>(col - columns.begin()));
    current = truth ? n->condition()->on_true : n->condition()->on_false;
  }
  throw std::logic_error("completeness graph " + cg.id + " does not terminate");
}

namespace {

using FieldMap = std::unordered_map<FieldId, const FieldDecl*>;

Diagnostic make_diag(std::string_view code, std::string message, const SourceLocation& loc,
                     std::vector<std::string> subjects = {}, Severity severity = Severity::Error) {
  return Diagnostic{severity, std::string(code), std::move(message), loc, std::move(subjects)};
}

/// Strongly connected components (iterative Tarjan). Returns components with
/// more than one node, or a single node with a self edge.
std::vector<std::vector<std::size_t>> cyclic_components(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) {
      continue;
    }
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& frame = call.back();
      const std::size_t v = frame.node;
      if (frame.next_edge < adj[v].size()) {
        const std::size_t w = adj[v][frame.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w = 0;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        const bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
        if (comp.size() > 1 || self_loop) {
          out.push_back(std::move(comp));
        }
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return out;
}

/// Field-level dependency graph induced by calc models.
struct FieldGraph {
  std::vector<FieldId> ids;
  std::unordered_map<FieldId, std::size_t> index;
  std::vector<std::vector<std::size_t>> adj;

  std::size_t intern(const FieldId& f) {
    auto [it, inserted] = index.try_emplace(f, ids.size());
    if (inserted) {
      ids.push_back(f);
      adj.emplace_back();
    }
    return it->second;
  }
};

FieldGraph field_graph(const GraphDefinition& def) {
  FieldGraph g;
  for (const auto& m : def.calcs) {
    const auto out = g.intern(m.output);
    for (const auto& b : m.inputs) {
      if (const auto* f = b.field()) {
        const auto in = g.intern(*f);
        g.adj[in].push_back(out);
      }
    }
  }
  return g;
}

std::vector<std::vector<FieldId>> field_cycles(const GraphDefinition& def) {
  auto g = field_graph(def);
  std::vector<std::vector<FieldId>> cycles;
  for (const auto& comp : cyclic_components(g.adj)) {
    std::vector<FieldId> fields;
    for (auto i : comp) {
      fields.push_back(g.ids[i]);
    }
    std::sort(fields.begin(), fields.end());
    cycles.push_back(std::move(fields));
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

/// Kahn's algorithm over models; `rank` orders ties. Returns model indices,
/// possibly fewer than the model count if cycles exist.
std::vector<std::size_t> kahn(const GraphDefinition& def, const std::vector<std::size_t>& rank) {
  const std::size_t n = def.calcs.size();
  std::unordered_map<FieldId, std::vector<std::size_t>> producers;
  for (std::size_t m = 0; m < n; ++m) {
    producers[def.calcs[m].output].push_back(m);
  }
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t m = 0; m < n; ++m) {
    // Distinct producers only: a model reading the same field twice is one edge.
    std::set<std::size_t> preds;
    for (const auto& b : def.calcs[m].inputs) {
      if (const auto* f = b.field()) {
        if (auto it = producers.find(*f); it != producers.end()) {
          preds.insert(it->second.begin(), it->second.end());
        }
      }
    }
    for (auto p : preds) {
      succ[p].push_back(m);
      ++indegree[m];
    }
  }
  auto later = [&](std::size_t a, std::size_t b) { return rank[a] > rank[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t m = 0; m < n; ++m) {
    if (indegree[m] == 0) {
      ready.push(m);
    }
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto m = ready.top();
    ready.pop();
    order.push_back(m);
    for (auto s : succ[m]) {
      if (--indegree[s] == 0) {
        ready.push(s);
      }
    }
  }
  return order;
}

std::vector<std::size_t> id_rank(const GraphDefinition& def) {
  std::vector<std::size_t> by_id(def.calcs.size());
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    by_id[i] = i;
  }
  std::stable_sort(by_id.begin(), by_id.end(),
                   [&](std::size_t a, std::size_t b) { return def.calcs[a].id < def.calcs[b].id; });
  std::vector<std::size_t> rank(by_id.size());
  for (std::size_t r = 0; r < by_id.size(); ++r) {
    rank[by_id[r]] = r;
  }
  return rank;
}

bool is_numeric_semantics(GistSemantics s) {
  return s != GistSemantics::Calc && s != GistSemantics::Conditional;
}

void check_fields(const GraphDefinition& def, FieldMap& fields, std::vector<Diagnostic>& out) {
  for (const auto& f : def.fields) {
    if (!FieldId::is_valid_token(f.id.str())) {
      out.push_back(make_diag(codes::kInvalidId, "invalid field id '" + f.id.str() + "'", f.location, {f.id.str()}));
    }
    if (!fields.emplace(f.id, &f).second) {
      out.push_back(make_diag(codes::kDuplicateId, "duplicate field id '" + f.id.str() + "'", f.location, {f.id.str()}));
      continue;
    }
    if (f.kind == ValueKind::Text) {
      if (f.enumeration.empty()) {
        out.push_back(make_diag(codes::kInvalidValue, "text field '" + f.id.str() + "' declares no enumeration",
                                f.location, {f.id.str()}));
      }
      std::set<std::string> unique(f.enumeration.begin(), f.enumeration.end());
      if (unique.size() != f.enumeration.size()) {
        out.push_back(make_diag(codes::kInvalidValue, "duplicate enumeration value in '" + f.id.str() + "'",
                                f.location, {f.id.str()}));
      }
    } else if (!f.enumeration.empty()) {
      out.push_back(make_diag(codes::kInvalidValue, "enumeration on non-text field '" + f.id.str() + "'",
                              f.location, {f.id.str()}));
    }
    if (f.default_value) {
      if (f.role == FieldRole::Computed) {
        out.push_back(make_diag(codes::kInvalidDefault, "computed field '" + f.id.str() + "' cannot have a default",
                                f.location, {f.id.str()}));
      } else if (f.default_value->is_unknown() || f.default_value->kind() != f.kind) {
        out.push_back(make_diag(codes::kInvalidDefault,
                                "default of '" + f.id.str() + "' does not match kind " + std::string(to_string(f.kind)),
                                f.location, {f.id.str()}));
      } else if (!f.admits(*f.default_value)) {
        out.push_back(make_diag(codes::kEnumViolation,
                                "default '" + f.default_value->to_string() + "' of '" + f.id.str() +
                                    "' is not in its enumeration",
                                f.location, {f.id.str()}));
      }
    }
  }
}

void check_completeness(const CompletenessGraph& cg, const FieldMap& fields, std::vector<Diagnostic>& out) {
  const auto& loc = cg.location;
  std::map<std::string, const CompletenessNode*> nodes;
  bool structural_ok = true;
  for (const auto& n : cg.nodes) {
    if (!FieldId::is_valid_token(n.id)) {
      out.push_back(make_diag(codes::kInvalidId, "invalid node id '" + n.id + "'", n.location, {cg.id}));
      structural_ok = false;
    }
    if (!nodes.emplace(n.id, &n).second) {
      out.push_back(make_diag(codes::kDuplicateId, "duplicate node id '" + n.id + "' in " + cg.id, n.location, {cg.id}));
      structural_ok = false;
    }
  }
  for (const auto& n : cg.nodes) {
    if (const auto* o = n.outcome()) {
      if (!FieldId::is_valid_token(o->decision)) {
        out.push_back(make_diag(codes::kInvalidValue, "invalid decision token '" + o->decision + "'", n.location, {cg.id}));
      }
      continue;
    }
    const auto& c = *n.condition();
    for (const auto* edge : {&c.on_true, &c.on_false}) {
      if (!nodes.contains(*edge)) {
        out.push_back(make_diag(codes::kDanglingReference, "condition '" + n.id + "' points to unknown node '" + *edge + "'",
                                n.location, {cg.id}));
        structural_ok = false;
      }
    }
    auto f = fields.find(c.var);
    if (f == fields.end()) {
      out.push_back(make_diag(codes::kDanglingReference, "condition '" + n.id + "' tests undeclared field '" + c.var.str() + "'",
                              n.location, {cg.id, c.var.str()}));
      continue;
    }
    const auto& decl = *f->second;
    if (is_ordering(c.op) && !is_numeric(decl.kind)) {
      out.push_back(make_diag(codes::kKindMismatch,
                              "ordering predicate '" + std::string(to_string(c.op)) + "' on " +
                                  std::string(to_string(decl.kind)) + " field '" + decl.id.str() + "'",
                              n.location, {cg.id, c.var.str()}));
    }
    const bool kind_ok = c.constant.is_numeric() ? is_numeric(decl.kind) : c.constant.kind() == decl.kind;
    if (!kind_ok) {
      out.push_back(make_diag(codes::kKindMismatch,
                              "constant '" + c.constant.to_string() + "' does not match kind of '" + decl.id.str() + "'",
                              n.location, {cg.id, c.var.str()}));
    } else if (decl.kind == ValueKind::Text && !decl.admits(c.constant)) {
      out.push_back(make_diag(codes::kEnumViolation,
                              "'" + c.constant.to_string() + "' is not in the enumeration of '" + decl.id.str() + "'",
                              n.location, {cg.id, c.var.str()}));
    }
  }
  if (!nodes.contains(cg.start)) {
    out.push_back(make_diag(codes::kDanglingReference, "start node '" + cg.start + "' of " + cg.id + " does not exist",
                            loc, {cg.id}));
    structural_ok = false;
  }
  if (!structural_ok) {
    return;
  }

  // Reachability and acyclicity from start.
  std::map<std::string, int> color; // 1 = on path, 2 = done
  bool cyclic = false;
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    color[id] = 1;
    if (const auto* c = nodes.at(id)->condition()) {
      for (const auto* next : {&c->on_true, &c->on_false}) {
        const int state = color.contains(*next) ? color[*next] : 0;
        if (state == 1) {
          cyclic = true;
        } else if (state == 0) {
          dfs(*next);
        }
      }
    }
    color[id] = 2;
  };
  dfs(cg.start);
  if (cyclic) {
    out.push_back(make_diag(codes::kCompletenessStructure, "completeness graph '" + cg.id + "' contains a cycle", loc, {cg.id}));
    return;
  }
  std::size_t conditions = 0;
  for (const auto& [id, n] : nodes) {
    if (!color.contains(id)) {
      out.push_back(make_diag(codes::kUnreachableNode, "node '" + id + "' is unreachable from start", n->location,
                              {cg.id}, Severity::Warning));
    } else if (n->condition()) {
      ++conditions;
    }
  }
  if (conditions > kMaxConditions) {
    out.push_back(make_diag(codes::kTooManyConditions,
                            cg.id + " has " + std::to_string(conditions) + " conditions; at most " +
                                std::to_string(kMaxConditions) + " are supported",
                            loc, {cg.id}));
    return;
  }

  if (!cg.truth_table) {
    return;
  }
  const auto derived = derive_truth_table(cg);
  const auto& authored = *cg.truth_table;
  const auto tloc = authored.location;
  const std::size_t k = derived.columns.size();
  std::vector<std::size_t> to_derived;
  std::set<std::string> authored_cols;
  for (const auto& col : authored.columns) {
    authored_cols.insert(col.node_id);
    auto it = std::find_if(derived.columns.begin(), derived.columns.end(),
                           [&](const ConditionColumn& d) { return d.node_id == col.node_id; });
    if (it == derived.columns.end()) {
      out.push_back(make_diag(codes::kTruthTableMismatch,
                              "truth-table column '" + col.node_id + "' is not a reachable condition of " + cg.id, tloc,
                              {cg.id}));
      return;
    }
    to_derived.push_back(static_cast<std::size_t>(it - derived.columns.begin()));
  }
  if (authored_cols.size() != authored.columns.size() || authored.columns.size() != k) {
    out.push_back(make_diag(codes::kTruthTableMismatch,
                            "truth table of " + cg.id + " must have exactly one column per condition (" +
                                std::to_string(k) + ")",
                            tloc, {cg.id}));
    return;
  }
  std::vector<int> covered(derived.rows.size(), 0);
  for (std::size_t r = 0; r < authored.rows.size(); ++r) {
    const auto& row = authored.rows[r];
    if (row.values.size() != k) {
      out.push_back(make_diag(codes::kTruthTableMismatch, "row " + std::to_string(r + 1) + " has the wrong width", tloc, {cg.id}));
      return;
    }
    std::size_t index = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (!row.values[c]) {
        index |= std::size_t{1} << to_derived[c];
      }
    }
    ++covered[index];
    if (derived.rows[index].outcome != row.outcome) {
      out.push_back(make_diag(codes::kTruthTableMismatch,
                              "row " + std::to_string(r + 1) + " of " + cg.id + " says '" + row.outcome +
                                  "' but the graph decides '" + derived.rows[index].outcome + "'",
                              tloc, {cg.id}));
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (covered[i] != 1) {
      out.push_back(make_diag(codes::kTruthTableMismatch,
                              "truth table of " + cg.id + " must list every condition combination exactly once",
                              tloc, {cg.id}));
      break;
    }
  }
}

} // namespace

std::vector<Diagnostic> check_model(const BoundedCalcModel& m, const GistRegistry& gists,
                                    const FunctionTable& functions, const FieldMap& fields) {
  std::vector<Diagnostic> out;
  const auto& loc = m.location;
  const std::vector<std::string> subj{m.id};
  const auto* gist = gists.find(m.gist);
  if (gist == nullptr) {
    out.push_back(make_diag(codes::kUnknownGist, "unknown gist '" + m.gist + "' in calc '" + m.id + "'", loc, subj));
    return out;
  }
  if (gist->semantics == GistSemantics::Calc) {
    if (m.function.empty()) {
      out.push_back(make_diag(codes::kUnknownFunction, "CALC model '" + m.id + "' names no host function", loc, subj));
    } else if (const auto* fn = functions.find(m.function); fn == nullptr) {
      out.push_back(make_diag(codes::kUnknownFunction, "unknown host function '" + m.function + "'", loc, subj));
    } else if (fn->arity && *fn->arity != m.inputs.size()) {
      out.push_back(make_diag(codes::kArityMismatch,
                              m.function + " takes " + std::to_string(*fn->arity) + " inputs, '" + m.id + "' binds " +
                                  std::to_string(m.inputs.size()),
                              loc, subj));
    }
  } else if (!m.function.empty()) {
    out.push_back(make_diag(codes::kInvalidValue, "host function only applies to CALC models", loc, subj));
  }
  if (!gist->arity.admits(m.inputs.size())) {
    out.push_back(make_diag(codes::kArityMismatch,
                            gist->name + " does not accept " + std::to_string(m.inputs.size()) + " inputs (calc '" +
                                m.id + "')",
                            loc, subj));
  }

  // Roles: fixed-arity gists bind every declared role exactly once.
  std::map<std::string, const Binding*> by_role;
  if (gist->arity.is_variadic()) {
    for (const auto& b : m.inputs) {
      if (!b.role.empty()) {
        out.push_back(make_diag(codes::kRoleMismatch, gist->name + " is variadic; role '" + b.role + "' is not allowed",
                                b.location, subj));
      }
    }
  } else {
    for (const auto& b : m.inputs) {
      if (b.role.empty()) {
        out.push_back(make_diag(codes::kRoleMismatch, gist->name + " input without a role in '" + m.id + "'", b.location, subj));
      } else if (std::find(gist->roles.begin(), gist->roles.end(), b.role) == gist->roles.end()) {
        out.push_back(make_diag(codes::kRoleMismatch, gist->name + " has no role '" + b.role + "'", b.location, subj));
      } else if (!by_role.emplace(b.role, &b).second) {
        out.push_back(make_diag(codes::kRoleMismatch, "role '" + b.role + "' bound twice in '" + m.id + "'", b.location, subj));
      }
    }
    if (gist->arity.admits(m.inputs.size())) {
      for (const auto& r : gist->roles) {
        if (!by_role.contains(r)) {
          out.push_back(make_diag(codes::kRoleMismatch, "role '" + r + "' unbound in '" + m.id + "'", loc, subj));
        }
      }
    }
  }

  // References.
  bool refs_ok = true;
  for (const auto& b : m.inputs) {
    if (const auto* f = b.field(); f != nullptr && !fields.contains(*f)) {
      out.push_back(make_diag(codes::kDanglingReference, "calc '" + m.id + "' reads undeclared field '" + f->str() + "'",
                              b.location, {m.id, f->str()}));
      refs_ok = false;
    }
  }
  auto out_it = fields.find(m.output);
  if (out_it == fields.end()) {
    out.push_back(make_diag(codes::kDanglingReference, "calc '" + m.id + "' writes undeclared field '" + m.output.str() + "'",
                            loc, {m.id, m.output.str()}));
    return out;
  }
  const auto& out_decl = *out_it->second;
  if (out_decl.role != FieldRole::Computed) {
    out.push_back(make_diag(codes::kOutputNotComputed, "output '" + m.output.str() + "' of '" + m.id + "' is not declared computed",
                            loc, {m.id, m.output.str()}));
  }
  if (!refs_ok) {
    return out;
  }

  auto kind_of = [&](const Binding& b) -> std::optional<ValueKind> {
    if (const auto* f = b.field()) {
      return fields.at(*f)->kind;
    }
    return b.constant()->kind();
  };
  auto kind_error = [&](const Binding& b, const std::string& what) {
    out.push_back(make_diag(codes::kKindMismatch, "calc '" + m.id + "': " + what, b.location, subj));
  };

  if (is_numeric_semantics(gist->semantics)) {
    if (!is_numeric(out_decl.kind)) {
      out.push_back(make_diag(codes::kKindMismatch,
                              gist->name + " output '" + out_decl.id.str() + "' must be money or number", loc, subj));
    }
    for (const auto& b : m.inputs) {
      auto k = kind_of(b);
      if (!k || !is_numeric(*k)) {
        kind_error(b, gist->name + " input must be money or number");
      }
    }
  } else if (gist->semantics == GistSemantics::Conditional) {
    for (const auto& [role, b] : by_role) {
      auto k = kind_of(*b);
      if (role == "condition") {
        if (k != ValueKind::Boolean) {
          kind_error(*b, "condition must be boolean");
        }
        continue;
      }
      const bool compatible = k && (is_numeric(*k) ? is_numeric(out_decl.kind) : *k == out_decl.kind);
      if (!compatible) {
        kind_error(*b, "branch '" + role + "' does not match output kind " + std::string(to_string(out_decl.kind)));
      } else if (out_decl.kind == ValueKind::Text) {
        if (const auto* c = b->constant(); c != nullptr && !out_decl.admits(*c)) {
          out.push_back(make_diag(codes::kEnumViolation,
                                  "'" + c->to_string() + "' is not in the enumeration of '" + out_decl.id.str() + "'",
                                  b->location, subj));
        } else if (const auto* f = b->field()) {
          for (const auto& v : fields.at(*f)->enumeration) {
            if (!out_decl.admits(Value::text(v))) {
              kind_error(*b, "enumeration of '" + f->str() + "' is not a subset of '" + out_decl.id.str() + "'");
              break;
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<Diagnostic> validate(const GraphDefinition& def, const GistRegistry& gists,
                                 const FunctionTable& functions) {
  std::vector<Diagnostic> out;
  FieldMap fields;
  check_fields(def, fields, out);

  std::set<std::string> model_ids;
  std::map<FieldId, std::vector<const BoundedCalcModel*>> producers;
  for (const auto& m : def.calcs) {
    if (!FieldId::is_valid_token(m.id)) {
      out.push_back(make_diag(codes::kInvalidId, "invalid calc id '" + m.id + "'", m.location, {m.id}));
    }
    if (!model_ids.insert(m.id).second) {
      out.push_back(make_diag(codes::kDuplicateId, "duplicate calc id '" + m.id + "'", m.location, {m.id}));
    }
    auto diags = check_model(m, gists, functions, fields);
    out.insert(out.end(), std::make_move_iterator(diags.begin()), std::make_move_iterator(diags.end()));
    producers[m.output].push_back(&m);
  }
  for (const auto& [field, models] : producers) {
    if (models.size() > 1) {
      std::vector<std::string> ids;
      for (const auto* m : models) {
        ids.push_back(m->id);
      }
      std::sort(ids.begin(), ids.end());
      std::string msg = "field '" + field.str() + "' is the output of " + std::to_string(ids.size()) + " calcs:";
      for (const auto& id : ids) {
        msg += ' ' + id;
      }
      out.push_back(make_diag(codes::kDuplicateOutput, msg, models[1]->location, ids));
    }
  }
  for (const auto& f : def.fields) {
    if (f.role == FieldRole::Computed && !producers.contains(f.id)) {
      out.push_back(make_diag(codes::kComputedWithoutModel, "computed field '" + f.id.str() + "' has no calc producing it",
                              f.location, {f.id.str()}));
    }
  }
  for (const auto& cycle : field_cycles(def)) {
    std::vector<std::string> names;
    std::string msg = "dependency cycle through";
    for (const auto& f : cycle) {
      names.push_back(f.str());
      msg += ' ' + f.str();
    }
    SourceLocation loc;
    if (auto it = producers.find(cycle.front()); it != producers.end()) {
      loc = it->second.front()->location;
    }
    out.push_back(make_diag(codes::kCycle, msg, loc, names));
  }

  std::set<std::string> cg_ids;
  for (const auto& cg : def.completeness) {
    if (!FieldId::is_valid_token(cg.id)) {
      out.push_back(make_diag(codes::kInvalidId, "invalid completeness id '" + cg.id + "'", cg.location, {cg.id}));
    }
    if (!cg_ids.insert(cg.id).second) {
      out.push_back(make_diag(codes::kDuplicateId, "duplicate completeness id '" + cg.id + "'", cg.location, {cg.id}));
    }
    check_completeness(cg, fields, out);
  }
  return out;
}

std::vector<std::string> topo_order(const GraphDefinition& def) {
  const auto order = kahn(def, id_rank(def));
  if (order.size() != def.calcs.size()) {
    auto cycles = field_cycles(def);
    throw CycleError(cycles.empty() ? std::vector<FieldId>{} : cycles.front());
  }
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (auto m : order) {
    ids.push_back(def.calcs[m].id);
  }
  return ids;
}

std::optional<FieldIndex> KnowledgeGraph::find_field(const FieldId& id) const {
  auto it = field_index_.find(id);
  if (it == field_index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

FieldIndex KnowledgeGraph::field_index(const FieldId& id) const {
  if (auto i = find_field(id)) {
    return *i;
  }
  throw UnknownFieldError(id);
}

std::optional<ModelIndex> KnowledgeGraph::find_model(std::string_view id) const {
  auto it = model_index_.find(std::string(id));
  if (it == model_index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const CompletenessGraph* KnowledgeGraph::find_completeness(std::string_view id) const {
  for (const auto& cg : def_.completeness) {
    if (cg.id == id) {
      return &cg;
    }
  }
  return nullptr;
}

BuildResult KnowledgeGraph::build(GraphDefinition def, const GistRegistry& gists, const FunctionTable& functions) {
  BuildResult result;
  result.diagnostics = validate(def, gists, functions);
  if (has_errors(result.diagnostics)) {
    return result;
  }

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(def.fields.begin(), def.fields.end(), by_id);
  std::sort(def.calcs.begin(), def.calcs.end(), by_id);
  std::sort(def.completeness.begin(), def.completeness.end(), by_id);
  for (auto& cg : def.completeness) {
    std::sort(cg.nodes.begin(), cg.nodes.end(), by_id);
    auto location = cg.truth_table ? cg.truth_table->location : cg.location;
    cg.truth_table = derive_truth_table(cg);
    cg.truth_table->location = location;
  }

  std::shared_ptr<KnowledgeGraph> g(new KnowledgeGraph());
  g->gist_registry_ = gists;
  g->function_table_ = functions;
  g->def_ = std::move(def);
  const auto& d = g->def_;

  for (FieldIndex i = 0; i < d.fields.size(); ++i) {
    g->field_index_.emplace(d.fields[i].id, i);
  }
  const std::size_t n_models = d.calcs.size();
  g->producer_.assign(d.fields.size(), std::nullopt);
  g->consumers_.assign(d.fields.size(), {});
  g->slots_.resize(n_models);
  g->role_slots_.resize(n_models);
  g->outputs_.resize(n_models);
  for (ModelIndex m = 0; m < n_models; ++m) {
    auto& model = g->def_.calcs[m];
    g->model_index_.emplace(model.id, m);
    const auto* spec = g->gist_registry_.find(model.gist);
    g->gists_.push_back(*spec);
    g->functions_.push_back(spec->semantics == GistSemantics::Calc ? g->function_table_.find(model.function) : nullptr);
    const bool numeric = is_numeric_semantics(spec->semantics);
    std::set<FieldIndex> consumed;
    for (auto& b : model.inputs) {
      Slot slot;
      if (const auto* f = b.field()) {
        slot.field = g->field_index_.at(*f);
        consumed.insert(*slot.field);
      } else {
        if (numeric && b.constant()->kind() == ValueKind::Money) {
          b.source = Value::number(b.constant()->money_cents() * 100);
        }
        slot.constant = *b.constant();
      }
      g->slots_[m].push_back(std::move(slot));
    }
    for (const auto& role : spec->roles) {
      auto it = std::find_if(model.inputs.begin(), model.inputs.end(), [&](const Binding& b) { return b.role == role; });
      g->role_slots_[m].push_back(static_cast<std::size_t>(it - model.inputs.begin()));
    }
    const auto out = g->field_index_.at(model.output);
    g->outputs_[m] = out;
    g->producer_[out] = m;
    for (auto f : consumed) {
      g->consumers_[f].push_back(m);
    }
  }
  std::vector<std::size_t> rank(n_models);
  for (std::size_t i = 0; i < n_models; ++i) {
    rank[i] = i;
  }
  const auto order = kahn(g->def_, rank);
  g->topo_.assign(order.begin(), order.end());
  g->topo_pos_.resize(n_models);
  for (std::size_t p = 0; p < order.size(); ++p) {
    g->topo_pos_[order[p]] = p;
  }
  result.graph = std::move(g);
  return result;
}

} // namespace kg
