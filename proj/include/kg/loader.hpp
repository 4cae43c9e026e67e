#pragma once

#include "kg/diagnostic.hpp"
#include "kg/graph_model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kg {

struct ParseResult {
  GraphDefinition definition;
  std::vector<Diagnostic> diagnostics; // markup and vocabulary problems only
};

/// Reads a `.kg.xml` document into a definition without semantic checks.
/// Constants are typed from context (gist role, condition variable kind).
ParseResult parse_definition(std::string_view text, std::string_view file_name = "<input>",
                             const GistRegistry& gists = GistRegistry::builtin());

/// parse_definition followed by KnowledgeGraph::build. Returns every
/// diagnostic found; the graph is set only when none is an error.
BuildResult load(std::string_view text, std::string_view file_name = "<input>",
                 const GistRegistry& gists = GistRegistry::builtin(),
                 const FunctionTable& functions = FunctionTable::standard());

/// Reads and loads a file. Throws std::runtime_error if it cannot be read.
BuildResult load_file(const std::filesystem::path& path, const GistRegistry& gists = GistRegistry::builtin(),
                      const FunctionTable& functions = FunctionTable::standard());

/// Canonical serialization: fields, calcs and completeness graphs sorted by
/// id, every completeness graph followed by its full truth table.
std::string save(const KnowledgeGraph& graph);
std::string save(const GraphDefinition& def);

std::string read_text_file(const std::filesystem::path& path);

} // namespace kg
