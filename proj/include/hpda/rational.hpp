#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace hpda {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  return Rational(num, den);
}

// "p/q" with q > 0; integers are rendered as "p/1".
inline std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

// Compact form: "2/3", "1", "0".
inline std::string to_short_string(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1) {
    return boost::multiprecision::numerator(r).str();
  }
  return to_string(r);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline double log10_big(const BigInt& v) {
  if (v <= 0) return -HUGE_VAL;
  std::string digits = v.str();
  if (digits.size() <= 15) return std::log10(std::stod(digits));
  double lead = std::stod(digits.substr(0, 15));
  return std::log10(lead) + static_cast<double>(digits.size() - 15);
}

}  // namespace hpda
