#pragma once

#include "kg/graph_model.hpp"
#include "kg/loader.hpp"

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#ifndef KG_FIXTURE_DIR
#error "KG_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace kg::testing {

inline std::filesystem::path fixture_path(std::string_view name) {
  return std::filesystem::path(KG_FIXTURE_DIR) / name;
}

inline std::string fixture_text(std::string_view name) { return read_text_file(fixture_path(name)); }

inline std::shared_ptr<const KnowledgeGraph> load_fixture(std::string_view name) {
  auto result = load_file(fixture_path(name));
  if (!result.ok()) {
    std::string msg = "fixture " + std::string(name) + " failed to load:";
    for (const auto& d : result.diagnostics) {
      msg += "\n  " + format_diagnostic(d);
    }
    throw std::runtime_error(msg);
  }
  return result.graph;
}

inline Value money(std::string_view text) {
  auto v = parse_value(ValueKind::Money, text);
  if (!v) {
    throw std::invalid_argument("bad money literal " + std::string(text));
  }
  return *v;
}

inline Value number(std::string_view text) {
  auto v = parse_value(ValueKind::Number, text);
  if (!v) {
    throw std::invalid_argument("bad number literal " + std::string(text));
  }
  return *v;
}

/// First structural difference between two definitions (locations ignored),
/// or an empty string when they agree field by field.
std::string structural_difference(const GraphDefinition& a, const GraphDefinition& b);

} // namespace kg::testing
