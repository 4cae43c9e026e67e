#pragma once

#include "kg/decimal.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

namespace kg {

enum class ValueKind { Money, Number, Boolean, Text };

std::string_view to_string(ValueKind kind);
std::optional<ValueKind> parse_value_kind(std::string_view text);
constexpr bool is_numeric(ValueKind kind) { return kind == ValueKind::Money || kind == ValueKind::Number; }

inline constexpr int kMoneyScale = 2;
inline constexpr int kNumberScale = 4;

/// A field value. Money is fixed-point with 2 decimals, Number with 4.
/// A default-constructed Value is Unknown.
class Value {
public:
  Value() = default;

  static Value unknown() { return {}; }
  static Value money(std::int64_t cents) { return Value{MoneyRep{cents}}; }
  static Value number(std::int64_t units) { return Value{NumberRep{units}}; }
  static Value boolean(bool b) { return Value{b}; }
  static Value text(std::string s) { return Value{std::move(s)}; }

  bool is_unknown() const noexcept { return std::holds_alternative<std::monostate>(rep_); }
  /// std::nullopt for Unknown.
  std::optional<ValueKind> kind() const noexcept;
  bool is_numeric() const noexcept;

  std::int64_t money_cents() const { return std::get<MoneyRep>(rep_).cents; }
  std::int64_t number_units() const { return std::get<NumberRep>(rep_).units; }
  bool as_bool() const { return std::get<bool>(rep_); }
  const std::string& as_text() const { return std::get<std::string>(rep_); }
  /// Exact decimal view of a Money or Number value.
  Decimal as_decimal() const;

  /// Canonical rendering: "unknown", "200.00", "0.1500", "true", or the text.
  std::string to_string() const;

  friend bool operator==(const Value&, const Value&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Value& v) { return os << v.to_string(); }

private:
  struct MoneyRep {
    std::int64_t cents;
    friend bool operator==(const MoneyRep&, const MoneyRep&) = default;
  };
  struct NumberRep {
    std::int64_t units;
    friend bool operator==(const NumberRep&, const NumberRep&) = default;
  };
  using Rep = std::variant<std::monostate, MoneyRep, NumberRep, bool, std::string>;

  explicit Value(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

/// Parses a literal of the given kind. Text is accepted verbatim; enumeration
/// membership is the caller's concern.
std::optional<Value> parse_value(ValueKind kind, std::string_view text);

/// Kind inference for constants without context: decimal -> Number,
/// true/false -> Boolean, anything else -> Text.
Value infer_constant(std::string_view text);

/// Stores an exact result into a field of `kind`, rounding half away from
/// zero. std::nullopt on 64-bit overflow or a non-numeric kind.
std::optional<Value> assign_numeric(const Decimal& exact, ValueKind kind);

} // namespace kg
