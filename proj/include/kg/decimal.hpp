#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kg {

using Int128 = __int128;

/// Exact decimal: mantissa * 10^-scale. Used for intermediate arithmetic so
/// that rounding only ever happens when a result is stored into a field.
class Decimal {
public:
  constexpr Decimal() = default;
  constexpr Decimal(Int128 mantissa, int scale) : mantissa_(mantissa), scale_(scale) {}

  static constexpr Decimal from_money(std::int64_t cents) { return {cents, 2}; }
  static constexpr Decimal from_number(std::int64_t units) { return {units, 4}; }
  static constexpr Decimal zero() { return {0, 0}; }

  constexpr Int128 mantissa() const { return mantissa_; }
  constexpr int scale() const { return scale_; }
  constexpr bool is_negative() const { return mantissa_ < 0; }
  constexpr bool is_zero() const { return mantissa_ == 0; }

  // Arithmetic is exact; std::nullopt signals 128-bit overflow.
  std::optional<Decimal> plus(const Decimal& rhs) const;
  std::optional<Decimal> minus(const Decimal& rhs) const;
  std::optional<Decimal> times(const Decimal& rhs) const;
  std::optional<Decimal> negated() const;

  /// Three-way comparison by numeric value (scales may differ).
  int compare(const Decimal& rhs) const;

  /// Rounds half away from zero to `target_scale` digits and returns the
  /// mantissa at that scale, or std::nullopt if it does not fit 64 bits.
  std::optional<std::int64_t> round_to(int target_scale) const;

  /// Parses `[-]digits[.digits]` with at most `max_scale` fractional digits.
  static std::optional<Decimal> parse(std::string_view text, int max_scale);

private:
  Int128 mantissa_ = 0;
  int scale_ = 0;
};

/// Renders a fixed-point integer with exactly `scale` fractional digits,
/// e.g. format_fixed(20000, 2) == "200.00".
std::string format_fixed(std::int64_t mantissa, int scale);

} // namespace kg
