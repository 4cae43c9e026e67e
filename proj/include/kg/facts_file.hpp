#pragma once

#include "kg/graph_model.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kg {

struct FactsFileError {
  int line = 0;
  std::string message;
};

struct FactsFile {
  std::vector<std::pair<FieldId, Value>> facts; // file order
  std::vector<FactsFileError> errors;
};

/// Parses `FIELD=VALUE` lines (`#` starts a comment) and types each value
/// by its field's kind. Unknown fields, computed fields, bad literals and
/// values outside an enumeration are reported per line.
FactsFile parse_facts(std::string_view text, const KnowledgeGraph& graph);

} // namespace kg
