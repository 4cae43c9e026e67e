// kg: validate, evaluate, explain and compile knowledge graphs.

#include "kg/compiler.hpp"
#include "kg/completeness.hpp"
#include "kg/engine.hpp"
#include "kg/explainer.hpp"
#include "kg/facts_file.hpp"
#include "kg/loader.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct IoError {
  std::string message;
};

std::string read_or_throw(const std::string& path) {
  try {
    return kg::read_text_file(path);
  } catch (const std::exception& e) {
    throw IoError{e.what()};
  }
}

void write_or_throw(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw IoError{"cannot write " + path};
  }
}

void print_diagnostics(const std::vector<kg::Diagnostic>& diags, std::ostream& os) {
  for (const auto& d : diags) {
    os << kg::format_diagnostic(d) << '\n';
  }
}

// Loads a graph, printing diagnostics; null on failure.
std::shared_ptr<const kg::KnowledgeGraph> load_graph(const std::string& path) {
  auto result = kg::load(read_or_throw(path), path);
  print_diagnostics(result.diagnostics, std::cerr);
  return result.graph;
}

// Reads the facts file (if any) into a store; false after reporting errors.
bool load_facts(const kg::KnowledgeGraph& graph, const std::string& path, kg::FactStore& store,
                kg::EvalState& state) {
  if (path.empty()) {
    return true;
  }
  const auto parsed = kg::parse_facts(read_or_throw(path), graph);
  for (const auto& e : parsed.errors) {
    std::cerr << path << ':' << e.line << ": " << e.message << '\n';
  }
  if (!parsed.errors.empty()) {
    return false;
  }
  for (const auto& [field, value] : parsed.facts) {
    kg::set_fact(graph, store, state, field, value);
  }
  return true;
}

void print_tree(const kg::ExplanationNode& node, std::ostream& os) {
  os << std::string(static_cast<std::size_t>(node.depth) * 2, ' ') << node.text << "  [" << node.gist << "]\n";
  for (const auto& c : node.children) {
    print_tree(c, os);
  }
}

int cmd_validate(const std::string& file) {
  auto result = kg::load(read_or_throw(file), file);
  print_diagnostics(result.diagnostics, std::cout);
  if (!result.ok()) {
    return kDomainFailure;
  }
  std::cout << "OK\n";
  return kOk;
}

int cmd_eval(const std::string& file, const std::string& facts, const std::string& explain_field, int depth) {
  auto graph = load_graph(file);
  if (!graph) {
    return kDomainFailure;
  }
  kg::FactStore store;
  kg::EvalState state(*graph);
  if (!load_facts(*graph, facts, store, state)) {
    return kDomainFailure;
  }
  const auto result = kg::recompute(*graph, store, state);
  std::size_t width = 0;
  for (const auto& f : graph->fields()) {
    width = std::max(width, f.id.str().size());
  }
  for (const auto& [field, value] : result.values()) {
    std::cout << field.str() << std::string(width - field.str().size() + 2, ' ') << value.to_string() << '\n';
  }
  for (const auto& e : result.errors()) {
    std::cout << "error " << e.model_id << ": " << kg::to_string(e.error.code) << ": " << e.error.message << '\n';
  }
  if (!explain_field.empty()) {
    const kg::FieldId id(explain_field);
    if (!graph->find_field(id)) {
      std::cerr << "unknown field '" << explain_field << "'\n";
      return kDomainFailure;
    }
    std::cout << '\n';
    print_tree(kg::explain(*graph, result, store, id, depth), std::cout);
  }
  return result.errors().empty() ? kOk : kDomainFailure;
}

int cmd_missing(const std::string& file, const std::string& facts) {
  auto graph = load_graph(file);
  if (!graph) {
    return kDomainFailure;
  }
  kg::FactStore store;
  kg::EvalState state(*graph);
  if (!load_facts(*graph, facts, store, state)) {
    return kDomainFailure;
  }
  const auto result = kg::recompute(*graph, store, state);
  const auto report = kg::missing_report(*graph, store, result);
  for (const auto& e : report.completeness) {
    std::cout << e.graph_id << ": ";
    if (const auto* d = std::get_if<kg::Decided>(&e.status)) {
      std::cout << "decided: " << d->decision << "; no questions\n";
    } else if (e.next_question) {
      std::cout << "next question: " << e.next_question->str() << '\n';
    } else {
      std::cout << "undecided; no question can be asked\n";
    }
  }
  for (const auto& m : report.missing) {
    std::cout << "missing for " << m.field.str() << ':';
    for (std::size_t i = 0; i < m.inputs.size(); ++i) {
      std::cout << (i ? ", " : " ") << m.inputs[i].str();
    }
    std::cout << '\n';
  }
  for (const auto& e : report.errors) {
    std::cout << "error " << e.model_id << ": " << kg::to_string(e.error.code) << ": " << e.error.message << '\n';
  }
  if (report.empty() && report.completeness.empty()) {
    std::cout << "nothing missing\n";
  }
  return kOk;
}

int cmd_compile(const std::string& corpus_path, const std::string& fields_path, const std::string& out_path,
                const std::string& report_path, const std::string& patterns_path) {
  const auto parsed = kg::parse_definition(read_or_throw(fields_path), fields_path);
  print_diagnostics(parsed.diagnostics, std::cerr);
  if (kg::has_errors(parsed.diagnostics)) {
    return kDomainFailure;
  }
  std::vector<kg::InstructionLine> corpus;
  try {
    corpus = kg::parse_corpus_tsv(read_or_throw(corpus_path));
  } catch (const std::runtime_error& e) {
    std::cerr << corpus_path << ": " << e.what() << '\n';
    return kDomainFailure;
  }
  std::optional<kg::PatternTable> custom;
  if (!patterns_path.empty()) {
    try {
      custom = kg::PatternTable::parse(read_or_throw(patterns_path));
    } catch (const std::runtime_error& e) {
      std::cerr << patterns_path << ": " << e.what() << '\n';
      return kDomainFailure;
    }
  }
  const auto& patterns = custom ? *custom : kg::PatternTable::builtin();
  auto result = kg::compile_form(corpus, parsed.definition.fields, kg::GistRegistry::builtin(), patterns);
  result.fragment.id = parsed.definition.id;
  write_or_throw(out_path, kg::save(result.fragment));
  if (!report_path.empty()) {
    write_or_throw(report_path, kg::report_json(result));
  }
  std::cout << kg::report_table(result);
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tax knowledge-graph tool"};
  app.require_subcommand(1);

  std::string file;
  std::string facts;
  std::string explain_field;
  int depth = 1;

  auto* validate = app.add_subcommand("validate", "Check a .kg.xml file and print diagnostics");
  validate->add_option("FILE", file, "Graph definition")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a graph against a facts file");
  eval->add_option("FILE", file, "Graph definition")->required();
  eval->add_option("--facts", facts, "FIELD=VALUE facts file");
  eval->add_option("--explain", explain_field, "Print the explanation tree of FIELD");
  eval->add_option("--depth", depth, "Explanation depth")->check(CLI::Range(1, 1000));

  auto* missing = app.add_subcommand("missing", "Report missing information and the next question");
  missing->add_option("FILE", file, "Graph definition")->required();
  missing->add_option("--facts", facts, "FIELD=VALUE facts file");

  std::string corpus;
  std::string fields;
  std::string out;
  std::string report;
  std::string patterns;
  auto* compile = app.add_subcommand("compile", "Compile an instruction corpus into calc models");
  compile->add_option("CORPUS", corpus, "form<TAB>line<TAB>text file")->required();
  compile->add_option("--fields", fields, "Graph whose fields declare the form lines")->required();
  compile->add_option("-o,--output", out, "Fragment to write")->required();
  compile->add_option("--report", report, "JSON report to write");
  compile->add_option("--patterns", patterns, "Pattern table replacing the built-in one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (validate->parsed()) {
      return cmd_validate(file);
    }
    if (eval->parsed()) {
      return cmd_eval(file, facts, explain_field, depth);
    }
    if (missing->parsed()) {
      return cmd_missing(file, facts);
    }
    return cmd_compile(corpus, fields, out, report, patterns);
  } catch (const IoError& e) {
    std::cerr << "kg: " << e.message << '\n';
    return kUsage;
  }
}
