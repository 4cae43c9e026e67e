#pragma once

#include "kg/engine.hpp"
#include "kg/graph_model.hpp"

#include <limits>
#include <string>
#include <vector>

namespace kg {

inline constexpr std::string_view kInputFactGist = "input-fact";
inline constexpr std::string_view kDefaultGist = "default";

struct ExplanationNode {
  FieldId field;
  std::string label; // display name
  Value value;
  std::string text;
  std::string gist; // producing GIST name, "input-fact" or "default"
  std::vector<ExplanationNode> children;
  int depth = 0;

  friend bool operator==(const ExplanationNode&, const ExplanationNode&) = default;
};

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

/// Explanation tree for `field`, expanded `depth` levels below the root
/// (depth >= 1). Throws UnknownFieldError, or std::invalid_argument on a
/// depth below 1.
ExplanationNode explain(const KnowledgeGraph& graph, const EvalResult& eval, const FactStore& store,
                        const FieldId& field, int depth);

/// Pre-order flattening of the fully expanded tree. Returned nodes carry no
/// children.
std::vector<ExplanationNode> explain_path(const KnowledgeGraph& graph, const EvalResult& eval,
                                          const FactStore& store, const FieldId& field);

/// Renders one model's explanation template with the values in `eval`.
std::string render_explanation(const KnowledgeGraph& graph, const EvalResult& eval, ModelIndex model);

} // namespace kg
