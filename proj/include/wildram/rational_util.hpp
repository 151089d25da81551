#ifndef WILDRAM_RATIONAL_UTIL_HPP
#define WILDRAM_RATIONAL_UTIL_HPP

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace wildram {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_pow(const BigInt& base, std::uint64_t e) {
  BigInt r = 1, b = base;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

// Largest k with p^k | n, together with n / p^k.  v(0) is undefined here;
// callers must handle zero beforehand.
inline std::int64_t split_p_power(const BigInt& n, const BigInt& p, BigInt& unit) {
  if (n == 0) throw std::invalid_argument("split_p_power: zero input");
  std::int64_t k = 0;
  unit = n;
  while (unit % p == 0) {
    unit /= p;
    ++k;
  }
  return k;
}

// log_p(r) for exact powers of p; nullopt when r is not a power of p.
inline std::optional<std::int64_t> log_p_exact(const Rational& r, const BigInt& p) {
  if (r <= 0) return std::nullopt;
  BigInt un, ud;
  std::int64_t vn = split_p_power(numerator(r), p, un);
  std::int64_t vd = split_p_power(denominator(r), p, ud);
  if (un != 1 || ud != 1) return std::nullopt;
  return vn - vd;
}

// Exact rational square root; nullopt when r is not a perfect square.
inline std::optional<Rational> exact_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  BigInt n = numerator(r), d = denominator(r);
  BigInt sn = boost::multiprecision::sqrt(n);
  BigInt sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

inline std::string to_string(const Rational& r) {
  std::ostringstream os;
  if (denominator(r) == 1)
    os << numerator(r);
  else
    os << numerator(r) << '/' << denominator(r);
  return os.str();
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt n(s.substr(0, slash)), d(s.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator");
    return Rational(n, d);
  } catch (const std::exception&) {
    throw std::invalid_argument("parse_rational: bad rational '" + s + "'");
  }
}

}  // namespace wildram

#endif
