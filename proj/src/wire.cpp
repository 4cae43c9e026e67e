#include "kg/wire.hpp"

namespace kg::wire {

json to_json(const Value& v) {
  if (v.is_unknown()) {
    return nullptr;
  }
  switch (*v.kind()) {
  case ValueKind::Boolean:
    return v.as_bool();
  case ValueKind::Text:
    return v.as_text();
  default:
    return v.to_string();
  }
}

std::optional<Value> value_from_json(const FieldDecl& decl, const json& j, std::string& error) {
  if (j.is_null()) {
    return Value{};
  }
  const auto kind = std::string(to_string(decl.kind));
  if (decl.kind == ValueKind::Boolean) {
    if (!j.is_boolean()) {
      error = decl.id.str() + " expects a JSON boolean";
      return std::nullopt;
    }
    return Value::boolean(j.get<bool>());
  }
  if (!j.is_string()) {
    error = decl.id.str() + " expects a " + kind + " value as a JSON string";
    return std::nullopt;
  }
  auto v = parse_value(decl.kind, j.get<std::string>());
  if (!v) {
    error = "'" + j.get<std::string>() + "' is not a " + kind + " value";
    return std::nullopt;
  }
  if (!decl.admits(*v)) {
    error = "'" + j.get<std::string>() + "' is not in the enumeration of " + decl.id.str();
    return std::nullopt;
  }
  return v;
}

json to_json(const ExplanationNode& node) {
  json children = json::array();
  for (const auto& c : node.children) {
    children.push_back(to_json(c));
  }
  return json{{"field", node.field.str()},
              {"label", node.label},
              {"value", to_json(node.value)},
              {"text", node.text},
              {"gist", node.gist},
              {"depth", node.depth},
              {"children", std::move(children)}};
}

json to_json(const ModelError& error) {
  return json{{"model", error.model_id},
              {"code", std::string(to_string(error.error.code))},
              {"message", error.error.message}};
}

json to_json(const MissingReport& report) {
  json completeness = json::array();
  for (const auto& e : report.completeness) {
    json entry{{"graph", e.graph_id}};
    entry["next_question"] = e.next_question ? json(e.next_question->str()) : json(nullptr);
    if (const auto* d = std::get_if<Decided>(&e.status)) {
      entry["status"] = "decided";
      entry["decision"] = d->decision;
      entry["relevant"] = json::array();
      entry["live_rows"] = nullptr;
    } else {
      const auto& inc = std::get<Incomplete>(e.status);
      entry["status"] = "incomplete";
      entry["decision"] = nullptr;
      json relevant = json::array();
      for (const auto& f : inc.relevant) {
        relevant.push_back(f.str());
      }
      entry["relevant"] = std::move(relevant);
      entry["live_rows"] = inc.live_rows.size();
    }
    completeness.push_back(std::move(entry));
  }
  json missing = json::array();
  for (const auto& m : report.missing) {
    json inputs = json::array();
    for (const auto& f : m.inputs) {
      inputs.push_back(f.str());
    }
    missing.push_back(json{{"field", m.field.str()}, {"inputs", std::move(inputs)}});
  }
  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back(to_json(e));
  }
  return json{{"completeness", std::move(completeness)}, {"missing", std::move(missing)}, {"errors", std::move(errors)}};
}

json to_json(const Diagnostic& d) {
  json subjects = json::array();
  for (const auto& s : d.subjects) {
    subjects.push_back(s);
  }
  return json{{"severity", d.severity == Severity::Error ? "error" : "warning"},
              {"code", d.code},
              {"message", d.message},
              {"file", d.location.file},
              {"line", d.location.line},
              {"column", d.location.column},
              {"subjects", std::move(subjects)}};
}

} // namespace kg::wire
