#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace editfactory {

/// Fixed-point decimal with nine fractional digits.
///
/// Scores, composites and rates are carried in this type so that weighted
/// sums such as 0.4*4.70 + 0.4*4.85 + 0.2*4.43 are exact; rounding happens
/// only when a value is rendered (round-half-even).
class Decimal {
 public:
  static constexpr int kDigits = 9;
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  static constexpr Decimal from_int(std::int64_t v) { return from_units(v * kScale); }

  // Accepts an optional sign, digits and up to nine fractional digits.
  static Decimal parse(std::string_view text);
  // Rounds half-even to `places` fractional digits first (places <= 9).
  static Decimal from_double(double v, int places = 6);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / kScale; }

  Decimal round(int places) const;
  std::string to_string(int places) const;
  // Shortest exact rendering: "4", "4.5", "4.706".
  std::string to_canonical() const;

  // Exact division by an integer count, rounded half-even at nine digits.
  Decimal divided_by(std::int64_t n) const;
  // Exact scaling by num/den, rounded half-even at nine digits.
  Decimal scaled(std::int64_t num, std::int64_t den) const;

  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_units(a.units_ + b.units_); }
  friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_units(a.units_ - b.units_); }
  friend constexpr Decimal operator*(Decimal a, std::int64_t k) { return from_units(a.units_ * k); }
  Decimal& operator+=(Decimal o) {
    units_ += o.units_;
    return *this;
  }
  friend constexpr auto operator<=>(Decimal, Decimal) = default;

 private:
  std::int64_t units_ = 0;
};

}  // namespace editfactory
