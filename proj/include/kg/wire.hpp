#pragma once

// JSON wire forms shared by the HTTP service and the CLI. Money and Number
// values travel as decimal strings, Unknown as null.

#include "kg/completeness.hpp"
#include "kg/diagnostic.hpp"
#include "kg/engine.hpp"
#include "kg/explainer.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace kg::wire {

using nlohmann::json;

json to_json(const Value& v);

/// Decodes a value for `decl`. Numeric kinds accept only decimal strings;
/// JSON numbers are rejected to keep amounts exact. Returns std::nullopt and
/// sets `error` on failure; null decodes to Unknown.
std::optional<Value> value_from_json(const FieldDecl& decl, const json& j, std::string& error);

json to_json(const ExplanationNode& node);
json to_json(const MissingReport& report);
json to_json(const ModelError& error);
json to_json(const Diagnostic& d);

} // namespace kg::wire
