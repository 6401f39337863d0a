#pragma once

// Exact probabilities of the form numerator / 2^log2_den.
//
// Classical St. Petersburg atoms have mass 2^-k, so every event built from
// finitely many draws has a dyadic probability. Values are kept unnormalized
// during accumulation; canonical() strips common factors of two.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

#include "stpete/errors.hpp"

namespace stpete {

using BigInt = boost::multiprecision::cpp_int;

class DyadicProb {
 public:
  DyadicProb() = default;
  DyadicProb(BigInt numerator, std::uint32_t log2_den)
      : num_(std::move(numerator)), log2_den_(log2_den) {
    detail::require(num_ >= 0, "numerator", "must be non-negative");
  }

  static DyadicProb zero() { return {}; }
  static DyadicProb one() { return {BigInt(1), 0}; }
  /// 2^-k.
  static DyadicProb pow2(std::uint32_t k) { return {BigInt(1), k}; }

  const BigInt& numerator() const noexcept { return num_; }
  std::uint32_t log2_denominator() const noexcept { return log2_den_; }

  /// Numerator odd, or zero with log2_den = 0.
  DyadicProb canonical() const {
    if (num_ == 0) return {};
    const auto tz = static_cast<std::uint32_t>(boost::multiprecision::lsb(num_));
    const std::uint32_t shift = std::min(tz, log2_den_);
    return {BigInt(num_ >> shift), log2_den_ - shift};
  }

  /// The same value over the larger denominator 2^d (d >= log2_den).
  BigInt numerator_at(std::uint32_t d) const {
    detail::require(d >= log2_den_, "log2_den", "cannot shrink a denominator");
    return num_ << (d - log2_den_);
  }

  DyadicProb& operator+=(const DyadicProb& o) {
    const std::uint32_t d = std::max(log2_den_, o.log2_den_);
    num_ = numerator_at(d) + o.numerator_at(d);
    log2_den_ = d;
    return *this;
  }
  friend DyadicProb operator+(DyadicProb a, const DyadicProb& b) { return a += b; }

  /// Difference; throws if the result would be negative.
  friend DyadicProb operator-(const DyadicProb& a, const DyadicProb& b) {
    const std::uint32_t d = std::max(a.log2_den_, b.log2_den_);
    BigInt n = a.numerator_at(d) - b.numerator_at(d);
    detail::require(n >= 0, "difference", "negative dyadic value");
    return {std::move(n), d};
  }

  friend DyadicProb operator*(const DyadicProb& a, const DyadicProb& b) {
    return {a.num_ * b.num_, a.log2_den_ + b.log2_den_};
  }

  /// Exact comparison of values (not representations).
  friend std::strong_ordering operator<=>(const DyadicProb& a, const DyadicProb& b) {
    const std::uint32_t d = std::max(a.log2_den_, b.log2_den_);
    const BigInt x = a.numerator_at(d);
    const BigInt y = b.numerator_at(d);
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const DyadicProb& a, const DyadicProb& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

  long double to_long_double() const {
    if (num_ == 0) return 0.0L;
    // Keep the top 64 bits so huge numerators do not overflow.
    const auto bits = static_cast<std::int64_t>(boost::multiprecision::msb(num_)) + 1;
    const std::int64_t drop = bits > 64 ? bits - 64 : 0;
    const BigInt top = num_ >> static_cast<unsigned>(drop);
    const auto mant = static_cast<std::uint64_t>(top);
    return std::ldexp(static_cast<long double>(mant),
                      static_cast<int>(drop - static_cast<std::int64_t>(log2_den_)));
  }
  double to_double() const { return static_cast<double>(to_long_double()); }

  /// Exact decimal expansion; terminates because the denominator is 2^d.
  std::string to_decimal_string() const {
    const DyadicProb c = canonical();
    if (c.log2_den_ == 0) return c.num_.str();
    BigInt scaled = c.num_;
    for (std::uint32_t i = 0; i < c.log2_den_; ++i) scaled *= 5;
    std::string digits = scaled.str();
    if (digits.size() <= c.log2_den_) digits.insert(0, c.log2_den_ + 1 - digits.size(), '0');
    digits.insert(digits.size() - c.log2_den_, 1, '.');
    return digits;
  }

  /// {"num":"<decimal>","log2_den":<int>} of the canonical form.
  std::string to_json() const {
    const DyadicProb c = canonical();
    return "{\"num\":\"" + c.num_.str() + "\",\"log2_den\":" + std::to_string(c.log2_den_) + "}";
  }

 private:
  BigInt num_{0};
  std::uint32_t log2_den_ = 0;
};

}  // namespace stpete
