#include "kg/facts_file.hpp"

#include "kg/engine.hpp"

namespace kg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

} // namespace

FactsFile parse_facts(std::string_view text, const KnowledgeGraph& graph) {
  FactsFile out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      out.errors.push_back({line_no, "expected FIELD=VALUE"});
      continue;
    }
    const FieldId field{std::string(trim(line.substr(0, eq)))};
    const auto literal = trim(line.substr(eq + 1));
    const auto index = graph.find_field(field);
    if (!index) {
      out.errors.push_back({line_no, "unknown field '" + field.str() + "'"});
      continue;
    }
    const auto& decl = graph.field(*index);
    auto value = parse_value(decl.kind, literal);
    if (!value) {
      out.errors.push_back({line_no, "'" + std::string(literal) + "' is not a " + std::string(to_string(decl.kind)) +
                                         " value for " + field.str()});
      continue;
    }
    try {
      FactStore::check(graph, field, *value);
    } catch (const KgError& e) {
      out.errors.push_back({line_no, e.what()});
      continue;
    }
    out.facts.emplace_back(field, std::move(*value));
  }
  return out;
}

} // namespace kg
