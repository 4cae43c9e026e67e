#pragma once

#include "kg/value.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kg {

/// Built-in evaluation rules a GIST can name.
enum class GistSemantics { Calc, Add, Subtract, NonnegSubtract, Multiply, Min, Max, Conditional };

struct Arity {
  std::size_t min = 0;
  std::optional<std::size_t> max;

  static Arity fixed(std::size_t n) { return {n, n}; }
  static Arity variadic(std::size_t min) { return {min, std::nullopt}; }

  bool is_variadic() const noexcept { return !max.has_value(); }
  bool admits(std::size_t n) const noexcept { return n >= min && (!max || n <= *max); }
};

/// A generic calculation pattern: "adding all input values", "the difference
/// between two input values", ...
struct GistSpec {
  std::string name;
  Arity arity;
  std::vector<std::string> roles; // empty for variadic gists
  GistSemantics semantics = GistSemantics::Add;
  std::string explanation_template;
};

/// One parsed `{...}` placeholder of an explanation template.
struct TemplatePlaceholder {
  enum class Kind { Out, OutVal, In, InVal, Inputs } kind;
  std::string role; // for In / InVal
  std::size_t begin = 0;
  std::size_t end = 0; // one past the closing brace
};

/// Parses placeholders; std::nullopt on an unknown or unterminated placeholder.
std::optional<std::vector<TemplatePlaceholder>> parse_template(std::string_view tmpl);

class GistRegistry {
public:
  /// CALC, ADD, SUBTRACT, NONNEG_SUBTRACT, MULTIPLY, MIN, MAX, CONDITIONAL.
  static const GistRegistry& builtin();

  /// Throws std::invalid_argument on a duplicate name, or a template that
  /// names a role the gist does not declare.
  void add(GistSpec spec);
  const GistSpec* find(std::string_view name) const;
  std::vector<const GistSpec*> specs() const;

private:
  std::map<std::string, GistSpec, std::less<>> specs_;
};

/// Pure host function backing the CALC gist.
struct HostFunction {
  std::optional<std::size_t> arity;
  std::function<Value(std::span<const Value>)> fn;
};

class FunctionTable {
public:
  /// DIVIDE(a, b) -> Number rounded to 4 places; ABS(x); ROUND(x) to whole units.
  static const FunctionTable& standard();

  void add(std::string name, HostFunction fn);
  const HostFunction* find(std::string_view name) const;

private:
  std::map<std::string, HostFunction, std::less<>> functions_;
};

} // namespace kg
