#pragma once

// Minimal element tree over expat, keeping the source position of every
// element so diagnostics can point at it.

#include "kg/diagnostic.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kg::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  SourceLocation location;
  // Location of the first non-whitespace character data, if any.
  std::optional<SourceLocation> stray_text;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) {
        return &v;
      }
    }
    return nullptr;
  }
};

struct Document {
  std::optional<Element> root;
  std::vector<Diagnostic> diagnostics;
};

Document parse(std::string_view text, std::string_view file_name);

/// Escapes text for use inside a double-quoted attribute value.
std::string escape_attribute(std::string_view text);

} // namespace kg::xml
