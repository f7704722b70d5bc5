#include "editfactory/decimal.hpp"

#include <cmath>
#include <cstdlib>

#include "editfactory/error.hpp"

namespace editfactory {
namespace {

using i128 = __int128;

std::int64_t pow10(int n) {
  std::int64_t p = 1;
  while (n-- > 0) p *= 10;
  return p;
}

// num/den rounded to nearest, ties to even. den > 0.
i128 div_half_even(i128 num, i128 den) {
  i128 q = num / den;
  i128 r = num % den;
  if (r < 0) {
    r += den;
    q -= 1;
  }
  const i128 twice = 2 * r;
  if (twice > den || (twice == den && (q % 2 != 0))) q += 1;
  return q;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  i128 whole = 0;
  bool any_digit = false;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    whole = whole * 10 + (text[i] - '0');
    any_digit = true;
    if (whole > i128(9'000'000'000)) raise(ErrorCode::kInvalidArgument, "decimal out of range: " + std::string(text));
    ++i;
  }
  i128 frac = 0;
  int frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      if (frac_digits == kDigits) raise(ErrorCode::kInvalidArgument, "too many fractional digits: " + std::string(text));
      frac = frac * 10 + (text[i] - '0');
      ++frac_digits;
      any_digit = true;
      ++i;
    }
  }
  if (!any_digit || i != text.size()) raise(ErrorCode::kInvalidArgument, "not a decimal: '" + std::string(text) + "'");
  i128 units = whole * kScale + frac * pow10(kDigits - frac_digits);
  return from_units(static_cast<std::int64_t>(negative ? -units : units));
}

Decimal Decimal::from_double(double v, int places) {
  if (!std::isfinite(v) || std::fabs(v) > 9e9) raise(ErrorCode::kInvalidArgument, "non-finite or huge decimal");
  if (places < 0 || places > kDigits) raise(ErrorCode::kInvalidArgument, "bad decimal places");
  const double scaled = v * static_cast<double>(pow10(places));
  const double r = std::nearbyint(scaled);  // default FE_TONEAREST: ties to even
  return from_units(static_cast<std::int64_t>(r) * pow10(kDigits - places));
}

Decimal Decimal::round(int places) const {
  if (places < 0 || places > kDigits) raise(ErrorCode::kInvalidArgument, "bad decimal places");
  const std::int64_t step = pow10(kDigits - places);
  return from_units(static_cast<std::int64_t>(div_half_even(units_, step) * step));
}

std::string Decimal::to_string(int places) const {
  const Decimal r = round(places);
  std::int64_t u = r.units_;
  std::string sign;
  if (u < 0) {
    sign = "-";
    u = -u;
  }
  std::string out = sign + std::to_string(u / kScale);
  if (places > 0) {
    std::string frac = std::to_string(u % kScale);
    frac.insert(0, kDigits - frac.size(), '0');
    out += "." + frac.substr(0, places);
  }
  return out;
}

std::string Decimal::to_canonical() const {
  std::string s = to_string(kDigits);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

Decimal Decimal::divided_by(std::int64_t n) const {
  if (n <= 0) raise(ErrorCode::kInvalidArgument, "division by non-positive count");
  return from_units(static_cast<std::int64_t>(div_half_even(units_, n)));
}

Decimal Decimal::scaled(std::int64_t num, std::int64_t den) const {
  if (den <= 0) raise(ErrorCode::kInvalidArgument, "non-positive denominator");
  return from_units(static_cast<std::int64_t>(div_half_even(i128(units_) * num, den)));
}

}  // namespace editfactory
