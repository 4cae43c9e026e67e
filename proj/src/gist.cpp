#include "kg/gist.hpp"
#include "kg/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace kg {

std::optional<std::vector<TemplatePlaceholder>> parse_template(std::string_view tmpl) {
  std::vector<TemplatePlaceholder> out;
  std::size_t pos = 0;
  while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
    const auto close = tmpl.find('}', pos);
    if (close == std::string_view::npos) {
      return std::nullopt;
    }
    const auto body = tmpl.substr(pos + 1, close - pos - 1);
    TemplatePlaceholder p{TemplatePlaceholder::Kind::Out, {}, pos, close + 1};
    if (body == "out") {
      p.kind = TemplatePlaceholder::Kind::Out;
    } else if (body == "out_val") {
      p.kind = TemplatePlaceholder::Kind::OutVal;
    } else if (body == "inputs") {
      p.kind = TemplatePlaceholder::Kind::Inputs;
    } else if (body.starts_with("in:")) {
      p.kind = TemplatePlaceholder::Kind::In;
      p.role = std::string(body.substr(3));
    } else if (body.starts_with("in_val:")) {
      p.kind = TemplatePlaceholder::Kind::InVal;
      p.role = std::string(body.substr(7));
    } else {
      return std::nullopt;
    }
    out.push_back(std::move(p));
    pos = close + 1;
  }
  return out;
}

void GistRegistry::add(GistSpec spec) {
  if (specs_.contains(spec.name)) {
    throw std::invalid_argument("duplicate gist " + spec.name);
  }
  auto placeholders = parse_template(spec.explanation_template);
  if (!placeholders) {
    throw std::invalid_argument("malformed explanation template for " + spec.name);
  }
  for (const auto& p : *placeholders) {
    if (!p.role.empty() &&
        std::find(spec.roles.begin(), spec.roles.end(), p.role) == spec.roles.end()) {
      throw std::invalid_argument("template of " + spec.name + " names undeclared role " + p.role);
    }
  }
  auto name = spec.name;
  specs_.emplace(std::move(name), std::move(spec));
}

const GistSpec* GistRegistry::find(std::string_view name) const {
  auto it = specs_.find(name);
  return it == specs_.end() ? nullptr : &it->second;
}

std::vector<const GistSpec*> GistRegistry::specs() const {
  std::vector<const GistSpec*> out;
  for (const auto& [_, spec] : specs_) {
    out.push_back(&spec);
  }
  return out;
}

const GistRegistry& GistRegistry::builtin() {
  static const GistRegistry registry = [] {
    GistRegistry r;
    const std::vector<std::string> diff_roles{"minuend", "subtrahend"};
    r.add({"CALC", Arity::variadic(1), {}, GistSemantics::Calc,
           "{out} ({out_val}) is calculated from {inputs}"});
    r.add({"ADD", Arity::variadic(1), {}, GistSemantics::Add, "{out} ({out_val}) is the sum of {inputs}"});
    r.add({"SUBTRACT", Arity::fixed(2), diff_roles, GistSemantics::Subtract,
           "{out} ({out_val}) is {in:minuend} ({in_val:minuend}) minus {in:subtrahend} "
           "({in_val:subtrahend})"});
    r.add({"NONNEG_SUBTRACT", Arity::fixed(2), diff_roles, GistSemantics::NonnegSubtract,
           "{out} ({out_val}) is {in:minuend} ({in_val:minuend}) minus {in:subtrahend} "
           "({in_val:subtrahend}), floored at zero"});
    r.add({"MULTIPLY", Arity::variadic(2), {}, GistSemantics::Multiply,
           "{out} ({out_val}) is the product of {inputs}"});
    r.add({"MIN", Arity::variadic(2), {}, GistSemantics::Min, "{out} ({out_val}) is the smallest of {inputs}"});
    r.add({"MAX", Arity::variadic(2), {}, GistSemantics::Max, "{out} ({out_val}) is the largest of {inputs}"});
    r.add({"CONDITIONAL", Arity::fixed(3), {"condition", "then", "else"}, GistSemantics::Conditional,
           "{out} ({out_val}) is {in:then} ({in_val:then}) when {in:condition} ({in_val:condition}) "
           "holds, otherwise {in:else} ({in_val:else})"});
    return r;
  }();
  return registry;
}

void FunctionTable::add(std::string name, HostFunction fn) { functions_[std::move(name)] = std::move(fn); }

const HostFunction* FunctionTable::find(std::string_view name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

namespace {

Decimal numeric_arg(const Value& v, std::string_view fn) {
  if (!v.is_numeric()) {
    throw EvalFailure(EvalErrorCode::KindMismatch, std::string(fn) + " expects numeric arguments");
  }
  return v.as_decimal();
}

Value same_kind(const Decimal& d, const Value& like) {
  auto out = assign_numeric(d, *like.kind());
  if (!out) {
    throw EvalFailure(EvalErrorCode::Overflow, "result out of range");
  }
  return *out;
}

} // namespace

const FunctionTable& FunctionTable::standard() {
  static const FunctionTable table = [] {
    FunctionTable t;
    t.add("DIVIDE", {2, [](std::span<const Value> args) {
                       const auto num = numeric_arg(args[0], "DIVIDE");
                       const auto den = numeric_arg(args[1], "DIVIDE");
                       if (den.is_zero()) {
                         throw EvalFailure(EvalErrorCode::DivisionByZero, "DIVIDE by zero");
                       }
                       // Quotient to 4 places, half away from zero: scale the
                       // numerator so the integer quotient carries 5 digits.
                       const int extra = kNumberScale + 1 + den.scale() - num.scale();
                       Int128 n = num.mantissa();
                       for (int i = 0; i < extra; ++i) {
                         if (__builtin_mul_overflow(n, Int128{10}, &n)) {
                           throw EvalFailure(EvalErrorCode::Overflow, "DIVIDE overflow");
                         }
                       }
                       Int128 d = den.mantissa();
                       if (extra < 0) {
                         for (int i = 0; i < -extra; ++i) {
                           d *= 10;
                         }
                       }
                       const Decimal quotient{n / d, kNumberScale + 1};
                       auto out = assign_numeric(quotient, ValueKind::Number);
                       if (!out) {
                         throw EvalFailure(EvalErrorCode::Overflow, "DIVIDE overflow");
                       }
                       return *out;
                     }});
    t.add("ABS", {1, [](std::span<const Value> args) {
                    const auto x = numeric_arg(args[0], "ABS");
                    return same_kind(x.is_negative() ? *x.negated() : x, args[0]);
                  }});
    t.add("ROUND", {1, [](std::span<const Value> args) {
                      const auto x = numeric_arg(args[0], "ROUND");
                      return same_kind(Decimal{*x.round_to(0), 0}, args[0]);
                    }});
    return t;
  }();
  return table;
}

} // namespace kg
