#include "kg/loader.hpp"

#include "xml_dom.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kg {

namespace {

using xml::Element;

class Reader {
public:
  Reader(std::vector<Diagnostic>& diags, const GistRegistry& gists) : diags_(diags), gists_(gists) {}

  GraphDefinition read(const Element& root) {
    GraphDefinition def;
    if (root.name != "knowledge-graph") {
      error(codes::kUnknownElement, "expected <knowledge-graph>, found <" + root.name + ">", root.location);
      return def;
    }
    check_attributes(root, {"id", "version"}, {});
    if (const auto* id = root.attribute("id")) {
      def.id = *id;
    }
    if (const auto* version = root.attribute("version"); version != nullptr && *version != "1") {
      error(codes::kUnsupportedVersion, "unsupported definition version '" + *version + "'", root.location);
    }
    check_text(root);

    // Fields first: constants elsewhere are typed by field kinds.
    for (const auto& section : root.children) {
      if (section.name == "fields") {
        check_attributes(section, {}, {});
        check_text(section);
        for (const auto& e : section.children) {
          if (expect(e, "field")) {
            def.fields.push_back(read_field(e));
          }
        }
      }
    }
    for (const auto& f : def.fields) {
      kinds_.emplace(f.id, f.kind);
    }
    for (const auto& section : root.children) {
      if (section.name == "fields") {
        continue;
      }
      if (section.name == "calcs") {
        check_attributes(section, {}, {});
        check_text(section);
        for (const auto& e : section.children) {
          if (expect(e, "calc")) {
            def.calcs.push_back(read_calc(e));
          }
        }
      } else if (section.name == "completeness") {
        def.completeness.push_back(read_completeness(section));
      } else {
        unknown_element(section);
      }
    }
    return def;
  }

private:
  void error(std::string_view code, std::string message, const SourceLocation& loc) {
    diags_.push_back(Diagnostic{Severity::Error, std::string(code), std::move(message), loc, {}});
  }

  void unknown_element(const Element& e) {
    error(codes::kUnknownElement, "unknown element <" + e.name + ">", e.location);
  }

  bool expect(const Element& e, std::string_view name) {
    if (e.name != name) {
      unknown_element(e);
      return false;
    }
    return true;
  }

  void check_text(const Element& e) {
    if (e.stray_text) {
      error(codes::kUnexpectedText, "unexpected text inside <" + e.name + ">", *e.stray_text);
    }
  }

  void check_attributes(const Element& e, std::initializer_list<std::string_view> allowed,
                        std::initializer_list<std::string_view> required) {
    for (const auto& [k, _] : e.attributes) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        error(codes::kUnknownAttribute, "unknown attribute '" + k + "' on <" + e.name + ">", e.location);
      }
    }
    for (auto r : required) {
      if (e.attribute(r) == nullptr) {
        error(codes::kMissingAttribute, "<" + e.name + "> requires attribute '" + std::string(r) + "'", e.location);
      }
    }
  }

  std::string attr(const Element& e, std::string_view key) {
    const auto* v = e.attribute(key);
    return v ? *v : std::string();
  }

  void no_children(const Element& e) {
    check_text(e);
    for (const auto& c : e.children) {
      unknown_element(c);
    }
  }

  FieldDecl read_field(const Element& e) {
    check_attributes(e, {"id", "kind", "role", "default", "label"}, {"id", "kind", "role"});
    check_text(e);
    FieldDecl f;
    f.location = e.location;
    f.id = FieldId(attr(e, "id"));
    f.label = attr(e, "label");
    if (const auto* k = e.attribute("kind")) {
      if (auto kind = parse_value_kind(*k)) {
        f.kind = *kind;
      } else {
        error(codes::kInvalidValue, "invalid kind '" + *k + "' (money|number|boolean|text)", e.location);
      }
    }
    if (const auto* r = e.attribute("role")) {
      if (*r == "input") {
        f.role = FieldRole::Input;
      } else if (*r == "computed") {
        f.role = FieldRole::Computed;
      } else {
        error(codes::kInvalidValue, "invalid role '" + *r + "' (input|computed)", e.location);
      }
    }
    for (const auto& c : e.children) {
      if (!expect(c, "enum")) {
        continue;
      }
      check_attributes(c, {"value"}, {"value"});
      no_children(c);
      if (const auto* v = c.attribute("value")) {
        f.enumeration.push_back(*v);
      }
    }
    if (const auto* d = e.attribute("default")) {
      if (auto v = parse_value(f.kind, *d)) {
        f.default_value = std::move(*v);
      } else {
        error(codes::kInvalidDefault, "default '" + *d + "' is not a valid " + std::string(to_string(f.kind)),
              e.location);
      }
    }
    return f;
  }

  std::optional<ValueKind> kind_of(const FieldId& f) const {
    auto it = kinds_.find(f);
    return it == kinds_.end() ? std::nullopt : std::optional<ValueKind>(it->second);
  }

  Value read_constant(const std::string& text, std::optional<ValueKind> expected, const SourceLocation& loc) {
    if (!expected) {
      return infer_constant(text);
    }
    if (auto v = parse_value(*expected, text)) {
      return *v;
    }
    error(codes::kInvalidValue, "constant '" + text + "' is not a valid " + std::string(to_string(*expected)), loc);
    return infer_constant(text);
  }

  BoundedCalcModel read_calc(const Element& e) {
    check_attributes(e, {"id", "gist", "out", "fn"}, {"id", "gist", "out"});
    check_text(e);
    BoundedCalcModel m;
    m.location = e.location;
    m.id = attr(e, "id");
    m.gist = attr(e, "gist");
    m.output = FieldId(attr(e, "out"));
    m.function = attr(e, "fn");
    const auto* spec = gists_.find(m.gist);
    for (const auto& c : e.children) {
      if (!expect(c, "in")) {
        continue;
      }
      check_attributes(c, {"role", "ref", "const"}, {});
      no_children(c);
      Binding b;
      b.location = c.location;
      b.role = attr(c, "role");
      const auto* ref = c.attribute("ref");
      const auto* konst = c.attribute("const");
      if ((ref == nullptr) == (konst == nullptr)) {
        error(ref ? codes::kInvalidValue : codes::kMissingAttribute, "<in> needs exactly one of 'ref' or 'const'",
              c.location);
        continue;
      }
      if (ref != nullptr) {
        b.source = FieldId(*ref);
      } else {
        // Type the literal by what the slot consumes.
        std::optional<ValueKind> expected;
        if (spec != nullptr) {
          switch (spec->semantics) {
          case GistSemantics::Calc:
            break;
          case GistSemantics::Conditional:
            expected = b.role == "condition" ? std::optional(ValueKind::Boolean) : kind_of(m.output);
            break;
          default:
            expected = ValueKind::Number;
          }
        }
        b.source = read_constant(*konst, expected, c.location);
      }
      m.inputs.push_back(std::move(b));
    }
    return m;
  }

  CompletenessGraph read_completeness(const Element& e) {
    check_attributes(e, {"id", "start"}, {"id", "start"});
    check_text(e);
    CompletenessGraph cg;
    cg.location = e.location;
    cg.id = attr(e, "id");
    cg.start = attr(e, "start");
    const Element* table = nullptr;
    for (const auto& c : e.children) {
      if (c.name == "condition") {
        check_attributes(c, {"id", "var", "op", "value", "true", "false"}, {"id", "var", "op", "value", "true", "false"});
        no_children(c);
        ConditionNode cond;
        cond.var = FieldId(attr(c, "var"));
        cond.on_true = attr(c, "true");
        cond.on_false = attr(c, "false");
        if (const auto* op = c.attribute("op")) {
          if (auto p = parse_predicate(*op)) {
            cond.op = *p;
          } else {
            error(codes::kInvalidValue, "invalid op '" + *op + "' (eq|ne|lt|le|gt|ge)", c.location);
          }
        }
        if (const auto* v = c.attribute("value")) {
          cond.constant = read_constant(*v, kind_of(cond.var), c.location);
        }
        cg.nodes.push_back({attr(c, "id"), std::move(cond), c.location});
      } else if (c.name == "outcome") {
        check_attributes(c, {"id", "decision"}, {"id", "decision"});
        no_children(c);
        cg.nodes.push_back({attr(c, "id"), OutcomeNode{attr(c, "decision")}, c.location});
      } else if (c.name == "truth-table") {
        if (table != nullptr) {
          error(codes::kUnknownElement, "second <truth-table> in completeness '" + cg.id + "'", c.location);
        }
        table = &c;
      } else {
        unknown_element(c);
      }
    }
    if (table != nullptr) {
      cg.truth_table = read_table(*table, cg);
    }
    return cg;
  }

  TruthTable read_table(const Element& e, const CompletenessGraph& cg) {
    check_attributes(e, {}, {});
    check_text(e);
    TruthTable t;
    t.location = e.location;
    bool columns_set = false;
    for (const auto& row : e.children) {
      if (!expect(row, "row")) {
        continue;
      }
      no_children(row);
      if (row.attribute("outcome") == nullptr) {
        error(codes::kMissingAttribute, "<row> requires attribute 'outcome'", row.location);
      }
      if (!columns_set) {
        for (const auto& [k, _] : row.attributes) {
          if (k == "outcome") {
            continue;
          }
          ConditionColumn col;
          col.node_id = k;
          if (const auto* n = cg.node(k); n != nullptr && n->condition()) {
            col.var = n->condition()->var;
            col.op = n->condition()->op;
            col.constant = n->condition()->constant;
          }
          t.columns.push_back(std::move(col));
        }
        columns_set = true;
      }
      TruthRow r;
      r.outcome = attr(row, "outcome");
      r.values.resize(t.columns.size());
      std::size_t seen = 0;
      for (const auto& [k, v] : row.attributes) {
        if (k == "outcome") {
          continue;
        }
        auto it = std::find_if(t.columns.begin(), t.columns.end(), [&](const ConditionColumn& c) { return c.node_id == k; });
        if (it == t.columns.end()) {
          error(codes::kTruthTableMismatch, "row names column '" + k + "' absent from the first row", row.location);
          continue;
        }
        if (v != "T" && v != "F") {
          error(codes::kInvalidValue, "truth value must be T or F, got '" + v + "'", row.location);
        }
        r.values[static_cast<std::size_t>(it - t.columns.begin())] = v == "T";
        ++seen;
      }
      if (seen != t.columns.size()) {
        error(codes::kTruthTableMismatch, "row does not assign every column", row.location);
      }
      t.rows.push_back(std::move(r));
    }
    return t;
  }

  std::vector<Diagnostic>& diags_;
  const GistRegistry& gists_;
  std::map<FieldId, ValueKind> kinds_;
};

void write_attr(std::ostringstream& os, std::string_view key, std::string_view value) {
  os << ' ' << key << "=\"" << xml::escape_attribute(value) << '"';
}

} // namespace

ParseResult parse_definition(std::string_view text, std::string_view file_name, const GistRegistry& gists) {
  ParseResult result;
  auto doc = xml::parse(text, file_name);
  result.diagnostics = std::move(doc.diagnostics);
  if (doc.root) {
    Reader reader(result.diagnostics, gists);
    result.definition = reader.read(*doc.root);
  }
  return result;
}

BuildResult load(std::string_view text, std::string_view file_name, const GistRegistry& gists,
                 const FunctionTable& functions) {
  auto parsed = parse_definition(text, file_name, gists);
  if (has_errors(parsed.diagnostics)) {
    // Semantic problems are still worth reporting when the markup parsed.
    const bool markup_broken = std::any_of(parsed.diagnostics.begin(), parsed.diagnostics.end(),
                                           [](const Diagnostic& d) { return d.code == codes::kMalformedXml; });
    if (!markup_broken) {
      auto semantic = validate(parsed.definition, gists, functions);
      parsed.diagnostics.insert(parsed.diagnostics.end(), semantic.begin(), semantic.end());
    }
    return {nullptr, std::move(parsed.diagnostics)};
  }
  auto built = KnowledgeGraph::build(std::move(parsed.definition), gists, functions);
  parsed.diagnostics.insert(parsed.diagnostics.end(), built.diagnostics.begin(), built.diagnostics.end());
  built.diagnostics = std::move(parsed.diagnostics);
  return built;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BuildResult load_file(const std::filesystem::path& path, const GistRegistry& gists, const FunctionTable& functions) {
  return load(read_text_file(path), path.string(), gists, functions);
}

std::string save(const KnowledgeGraph& graph) { return save(graph.definition()); }

std::string save(const GraphDefinition& input) {
  GraphDefinition def = input;
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::stable_sort(def.fields.begin(), def.fields.end(), by_id);
  std::stable_sort(def.calcs.begin(), def.calcs.end(), by_id);
  std::stable_sort(def.completeness.begin(), def.completeness.end(), by_id);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<knowledge-graph";
  if (!def.id.empty()) {
    write_attr(os, "id", def.id);
  }
  write_attr(os, "version", "1");
  if (def.fields.empty() && def.calcs.empty() && def.completeness.empty()) {
    os << "/>\n";
    return os.str();
  }
  os << ">\n";
  if (!def.fields.empty()) {
    os << "  <fields>\n";
    for (const auto& f : def.fields) {
      os << "    <field";
      write_attr(os, "id", f.id.str());
      write_attr(os, "kind", to_string(f.kind));
      write_attr(os, "role", to_string(f.role));
      if (f.default_value) {
        write_attr(os, "default", f.default_value->to_string());
      }
      if (!f.label.empty()) {
        write_attr(os, "label", f.label);
      }
      if (f.enumeration.empty()) {
        os << "/>\n";
        continue;
      }
      os << ">\n";
      for (const auto& v : f.enumeration) {
        os << "      <enum";
        write_attr(os, "value", v);
        os << "/>\n";
      }
      os << "    </field>\n";
    }
    os << "  </fields>\n";
  }
  if (!def.calcs.empty()) {
    os << "  <calcs>\n";
    for (const auto& m : def.calcs) {
      os << "    <calc";
      write_attr(os, "id", m.id);
      write_attr(os, "gist", m.gist);
      if (!m.function.empty()) {
        write_attr(os, "fn", m.function);
      }
      write_attr(os, "out", m.output.str());
      os << ">\n";
      for (const auto& b : m.inputs) {
        os << "      <in";
        if (!b.role.empty()) {
          write_attr(os, "role", b.role);
        }
        if (const auto* f = b.field()) {
          write_attr(os, "ref", f->str());
        } else {
          write_attr(os, "const", b.constant()->to_string());
        }
        os << "/>\n";
      }
      os << "    </calc>\n";
    }
    os << "  </calcs>\n";
  }
  for (const auto& cg : def.completeness) {
    os << "  <completeness";
    write_attr(os, "id", cg.id);
    write_attr(os, "start", cg.start);
    os << ">\n";
    auto nodes = cg.nodes;
    std::stable_sort(nodes.begin(), nodes.end(), by_id);
    for (const auto& n : nodes) {
      if (const auto* c = n.condition()) {
        os << "    <condition";
        write_attr(os, "id", n.id);
        write_attr(os, "var", c->var.str());
        write_attr(os, "op", to_string(c->op));
        write_attr(os, "value", c->constant.to_string());
        write_attr(os, "true", c->on_true);
        write_attr(os, "false", c->on_false);
        os << "/>\n";
      } else {
        os << "    <outcome";
        write_attr(os, "id", n.id);
        write_attr(os, "decision", n.outcome()->decision);
        os << "/>\n";
      }
    }
    if (cg.truth_table) {
      os << "    <truth-table>\n";
      for (const auto& row : cg.truth_table->rows) {
        os << "      <row";
        for (std::size_t c = 0; c < cg.truth_table->columns.size(); ++c) {
          write_attr(os, cg.truth_table->columns[c].node_id, row.values[c] ? "T" : "F");
        }
        write_attr(os, "outcome", row.outcome);
        os << "/>\n";
      }
      os << "    </truth-table>\n";
    }
    os << "  </completeness>\n";
  }
  os << "</knowledge-graph>\n";
  return os.str();
}

} // namespace kg
