#include "kg/explainer.hpp"

#include <algorithm>
#include <stdexcept>

namespace kg {

namespace {

struct Operand {
  std::string name;
  std::string value;
};

Operand operand(const KnowledgeGraph& graph, const EvalResult& eval, const KnowledgeGraph::Slot& slot) {
  if (slot.field) {
    return {graph.field(*slot.field).display_name(), eval.value(*slot.field).to_string()};
  }
  const auto text = slot.constant.to_string();
  return {text, text};
}

std::string join_operands(const KnowledgeGraph& graph, const EvalResult& eval, ModelIndex m) {
  const auto slots = graph.slots(m);
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0) {
      out += i + 1 == slots.size() ? " and " : ", ";
    }
    const auto op = operand(graph, eval, slots[i]);
    out += slots[i].field ? op.name + " (" + op.value + ")" : op.value;
  }
  return out;
}

ExplanationNode build(const KnowledgeGraph& graph, const EvalResult& eval, const FactStore& store, FieldIndex f,
                      int level, int max_depth) {
  const auto& decl = graph.field(f);
  ExplanationNode node;
  node.field = decl.id;
  node.label = decl.display_name();
  node.value = eval.value(f);
  node.depth = level;
  const auto value_text = node.value.to_string();

  const auto producer = graph.producer(f);
  if (!producer) {
    if (store.find(decl.id) == nullptr && decl.default_value) {
      node.gist = kDefaultGist;
      node.text = node.label + " (" + value_text + ") is the default value";
    } else {
      node.gist = kInputFactGist;
      node.text = store.find(decl.id) != nullptr ? node.label + " (" + value_text + ") was entered"
                                                 : node.label + " (" + value_text + ") has not been entered";
    }
    return node;
  }

  node.gist = graph.model(*producer).gist;
  node.text = render_explanation(graph, eval, *producer);
  if (level < max_depth) {
    for (const auto& slot : graph.slots(*producer)) {
      if (slot.field) {
        node.children.push_back(build(graph, eval, store, *slot.field, level + 1, max_depth));
      }
    }
  }
  return node;
}

void flatten(ExplanationNode node, std::vector<ExplanationNode>& out) {
  auto children = std::move(node.children);
  node.children.clear();
  out.push_back(std::move(node));
  for (auto& child : children) {
    flatten(std::move(child), out);
  }
}

} // namespace

std::string render_explanation(const KnowledgeGraph& graph, const EvalResult& eval, ModelIndex m) {
  const auto& spec = graph.gist(m);
  const auto out_field = graph.output(m);
  // Registration rejects malformed templates.
  const auto placeholders = *parse_template(spec.explanation_template);
  const auto& tmpl = spec.explanation_template;

  std::string text;
  std::size_t pos = 0;
  for (const auto& p : placeholders) {
    text.append(tmpl, pos, p.begin - pos);
    pos = p.end;
    switch (p.kind) {
    case TemplatePlaceholder::Kind::Out:
      text += graph.field(out_field).display_name();
      break;
    case TemplatePlaceholder::Kind::OutVal:
      text += eval.value(out_field).to_string();
      break;
    case TemplatePlaceholder::Kind::Inputs:
      text += join_operands(graph, eval, m);
      break;
    case TemplatePlaceholder::Kind::In:
    case TemplatePlaceholder::Kind::InVal: {
      const auto& roles = spec.roles;
      const auto r = static_cast<std::size_t>(std::find(roles.begin(), roles.end(), p.role) - roles.begin());
      const auto op = operand(graph, eval, graph.slots(m)[graph.role_slots(m)[r]]);
      text += p.kind == TemplatePlaceholder::Kind::In ? op.name : op.value;
      break;
    }
    }
  }
  text.append(tmpl, pos);
  return text;
}

ExplanationNode explain(const KnowledgeGraph& graph, const EvalResult& eval, const FactStore& store,
                        const FieldId& field, int depth) {
  if (depth < 1) {
    throw std::invalid_argument("explanation depth must be at least 1");
  }
  return build(graph, eval, store, graph.field_index(field), 0, depth);
}

std::vector<ExplanationNode> explain_path(const KnowledgeGraph& graph, const EvalResult& eval,
                                          const FactStore& store, const FieldId& field) {
  std::vector<ExplanationNode> out;
  flatten(explain(graph, eval, store, field, kUnlimitedDepth), out);
  return out;
}

} // namespace kg
