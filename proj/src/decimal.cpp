#include "kg/decimal.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace kg {

namespace {

constexpr int kMaxPow10 = 38;

std::optional<Int128> pow10(int n) {
  if (n < 0 || n > kMaxPow10) {
    return std::nullopt;
  }
  Int128 p = 1;
  for (int i = 0; i < n; ++i) {
    p *= 10;
  }
  return p;
}

std::optional<Int128> scale_up(Int128 value, int digits) {
  auto p = pow10(digits);
  if (!p) {
    return std::nullopt;
  }
  Int128 out = 0;
  if (__builtin_mul_overflow(value, *p, &out)) {
    return std::nullopt;
  }
  return out;
}

// Brings both operands to the larger scale.
bool align(const Decimal& a, const Decimal& b, Int128& ma, Int128& mb, int& scale) {
  scale = std::max(a.scale(), b.scale());
  auto sa = scale_up(a.mantissa(), scale - a.scale());
  auto sb = scale_up(b.mantissa(), scale - b.scale());
  if (!sa || !sb) {
    return false;
  }
  ma = *sa;
  mb = *sb;
  return true;
}

} // namespace

std::optional<Decimal> Decimal::plus(const Decimal& rhs) const {
  Int128 a = 0, b = 0, out = 0;
  int scale = 0;
  if (!align(*this, rhs, a, b, scale) || __builtin_add_overflow(a, b, &out)) {
    return std::nullopt;
  }
  return Decimal{out, scale};
}

std::optional<Decimal> Decimal::minus(const Decimal& rhs) const {
  Int128 a = 0, b = 0, out = 0;
  int scale = 0;
  if (!align(*this, rhs, a, b, scale) || __builtin_sub_overflow(a, b, &out)) {
    return std::nullopt;
  }
  return Decimal{out, scale};
}

std::optional<Decimal> Decimal::times(const Decimal& rhs) const {
  Int128 out = 0;
  if (__builtin_mul_overflow(mantissa_, rhs.mantissa_, &out) || scale_ + rhs.scale_ > kMaxPow10) {
    return std::nullopt;
  }
  return Decimal{out, scale_ + rhs.scale_};
}

std::optional<Decimal> Decimal::negated() const {
  Int128 out = 0;
  if (__builtin_sub_overflow(Int128{0}, mantissa_, &out)) {
    return std::nullopt;
  }
  return Decimal{out, scale_};
}

int Decimal::compare(const Decimal& rhs) const {
  Int128 a = 0, b = 0;
  int scale = 0;
  if (align(*this, rhs, a, b, scale)) {
    return a < b ? -1 : (a > b ? 1 : 0);
  }
  // Alignment overflowed: signs decide unless both share one.
  const int sa = mantissa_ < 0 ? -1 : (mantissa_ > 0 ? 1 : 0);
  const int sb = rhs.mantissa_ < 0 ? -1 : (rhs.mantissa_ > 0 ? 1 : 0);
  if (sa != sb) {
    return sa < sb ? -1 : 1;
  }
  // Same sign, so the side that overflowed on upscaling has the larger magnitude.
  const bool this_overflowed = !scale_up(mantissa_, scale - scale_);
  return this_overflowed ? sa : -sa;
}

std::optional<std::int64_t> Decimal::round_to(int target_scale) const {
  Int128 result = 0;
  if (target_scale >= scale_) {
    auto up = scale_up(mantissa_, target_scale - scale_);
    if (!up) {
      return std::nullopt;
    }
    result = *up;
  } else {
    auto div = pow10(scale_ - target_scale);
    if (!div) {
      result = 0;
    } else {
      const Int128 magnitude = mantissa_ < 0 ? -mantissa_ : mantissa_;
      Int128 q = magnitude / *div;
      const Int128 r = magnitude % *div;
      if (r * 2 >= *div) {
        ++q;
      }
      result = mantissa_ < 0 ? -q : q;
    }
  }
  if (result > std::numeric_limits<std::int64_t>::max() ||
      result < std::numeric_limits<std::int64_t>::min()) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(result);
}

std::optional<Decimal> Decimal::parse(std::string_view text, int max_scale) {
  if (text.empty()) {
    return std::nullopt;
  }
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-') {
    negative = true;
    ++i;
  }
  Int128 mantissa = 0;
  int scale = 0;
  bool seen_point = false;
  std::size_t int_digits = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.') {
      if (seen_point) {
        return std::nullopt;
      }
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') {
      return std::nullopt;
    }
    if (seen_point) {
      if (++scale > max_scale) {
        return std::nullopt;
      }
    } else {
      ++int_digits;
    }
    if (__builtin_mul_overflow(mantissa, Int128{10}, &mantissa) ||
        __builtin_add_overflow(mantissa, Int128{c - '0'}, &mantissa)) {
      return std::nullopt;
    }
  }
  if (int_digits == 0 || (seen_point && scale == 0)) {
    return std::nullopt;
  }
  return Decimal{negative ? -mantissa : mantissa, scale};
}

std::string format_fixed(std::int64_t mantissa, int scale) {
  const bool negative = mantissa < 0;
  // Widen before negating so INT64_MIN renders correctly.
  Int128 magnitude = negative ? -Int128{mantissa} : Int128{mantissa};
  std::string digits;
  do {
    digits.push_back(static_cast<char>('0' + static_cast<int>(magnitude % 10)));
    magnitude /= 10;
  } while (magnitude > 0);
  while (static_cast<int>(digits.size()) <= scale) {
    digits.push_back('0');
  }
  std::reverse(digits.begin(), digits.end());
  if (scale > 0) {
    digits.insert(digits.size() - static_cast<std::size_t>(scale), ".");
  }
  return negative ? "-" + digits : digits;
}

} // namespace kg
