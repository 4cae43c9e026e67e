#include "kg/value.hpp"

namespace kg {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
  case ValueKind::Money:
    return "money";
  case ValueKind::Number:
    return "number";
  case ValueKind::Boolean:
    return "boolean";
  case ValueKind::Text:
    return "text";
  }
  return "?";
}

std::optional<ValueKind> parse_value_kind(std::string_view text) {
  if (text == "money") return ValueKind::Money;
  if (text == "number") return ValueKind::Number;
  if (text == "boolean") return ValueKind::Boolean;
  if (text == "text") return ValueKind::Text;
  return std::nullopt;
}

std::optional<ValueKind> Value::kind() const noexcept {
  switch (rep_.index()) {
  case 1:
    return ValueKind::Money;
  case 2:
    return ValueKind::Number;
  case 3:
    return ValueKind::Boolean;
  case 4:
    return ValueKind::Text;
  default:
    return std::nullopt;
  }
}

bool Value::is_numeric() const noexcept {
  return std::holds_alternative<MoneyRep>(rep_) || std::holds_alternative<NumberRep>(rep_);
}

Decimal Value::as_decimal() const {
  if (const auto* m = std::get_if<MoneyRep>(&rep_)) {
    return Decimal::from_money(m->cents);
  }
  return Decimal::from_number(std::get<NumberRep>(rep_).units);
}

std::string Value::to_string() const {
  struct Render {
    std::string operator()(std::monostate) const { return "unknown"; }
    std::string operator()(const MoneyRep& m) const { return format_fixed(m.cents, kMoneyScale); }
    std::string operator()(const NumberRep& n) const { return format_fixed(n.units, kNumberScale); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Render{}, rep_);
}

std::optional<Value> parse_value(ValueKind kind, std::string_view text) {
  switch (kind) {
  case ValueKind::Money:
  case ValueKind::Number: {
    const int scale = kind == ValueKind::Money ? kMoneyScale : kNumberScale;
    auto d = Decimal::parse(text, scale);
    if (!d) {
      return std::nullopt;
    }
    return assign_numeric(*d, kind);
  }
  case ValueKind::Boolean:
    if (text == "true") return Value::boolean(true);
    if (text == "false") return Value::boolean(false);
    return std::nullopt;
  case ValueKind::Text:
    return Value::text(std::string(text));
  }
  return std::nullopt;
}

Value infer_constant(std::string_view text) {
  if (auto v = parse_value(ValueKind::Number, text)) {
    return *v;
  }
  if (auto v = parse_value(ValueKind::Boolean, text)) {
    return *v;
  }
  return Value::text(std::string(text));
}

std::optional<Value> assign_numeric(const Decimal& exact, ValueKind kind) {
  if (kind == ValueKind::Money) {
    if (auto cents = exact.round_to(kMoneyScale)) {
      return Value::money(*cents);
    }
  } else if (kind == ValueKind::Number) {
    if (auto units = exact.round_to(kNumberScale)) {
      return Value::number(*units);
    }
  }
  return std::nullopt;
}

} // namespace kg
