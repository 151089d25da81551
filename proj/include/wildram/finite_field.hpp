#ifndef WILDRAM_FINITE_FIELD_HPP
#define WILDRAM_FINITE_FIELD_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wildram {

// Packed element of F_q, q = p^m with m <= 2.  Coordinates in the basis
// 1, z; c1 is kept at zero when m == 1.  Plain value, context-free: all
// arithmetic goes through the owning FieldSpec.
struct FqCoeff {
  std::int64_t c0 = 0;
  std::int64_t c1 = 0;
  friend bool operator==(const FqCoeff&, const FqCoeff&) = default;
};

// F_q = F_p[z]/(h(z)) for prime p < 2^31 and m in {1, 2}.  Immutable after
// construction; safe to share between threads.
class FieldSpec {
 public:
  using Elem = FqCoeff;

  FieldSpec(std::int64_t p, int m, std::vector<std::int64_t> modulus)
      : p_(p), m_(m), modulus_(std::move(modulus)) {
    validate();
  }

  static FieldSpec prime_field(std::int64_t p) { return FieldSpec(p, 1, {0, 1}); }

  // F_{p^2} with the default modulus: z^2+z+1 for p = 2, z^2+1 for
  // p = 3 mod 4, z^2 - s (smallest non-residue s) otherwise.
  static FieldSpec quadratic_field(std::int64_t p) {
    if (p == 2) return FieldSpec(2, 2, {1, 1, 1});
    if (p % 4 == 3) return FieldSpec(p, 2, {1, 0, 1});
    for (std::int64_t s = 2; s < p; ++s) {
      bool residue = false;
      for (std::int64_t t = 1; !residue && t <= p / 2; ++t)
        if (t * t % p == s) residue = true;
      if (!residue) return FieldSpec(p, 2, {(p - s) % p, 0, 1});
    }
    throw std::invalid_argument("quadratic_field: no non-residue found");
  }

  std::int64_t p() const { return p_; }
  int m() const { return m_; }
  std::int64_t q() const { return m_ == 1 ? p_ : p_ * p_; }
  const std::vector<std::int64_t>& modulus() const { return modulus_; }
  // z^2 = -(r0 + r1 z) for m == 2
  std::int64_t r0() const { return modulus_[0]; }
  std::int64_t r1() const { return modulus_[1]; }

  bool same(const FieldSpec& o) const {
    return p_ == o.p_ && m_ == o.m_ && modulus_ == o.modulus_;
  }

  Elem zero() const { return {0, 0}; }
  Elem one() const { return {1, 0}; }
  Elem from_int(std::int64_t v) const { return {((v % p_) + p_) % p_, 0}; }

  Elem make(std::int64_t a0, std::int64_t a1) const {
    if (m_ == 1 && a1 != 0) throw std::invalid_argument("component out of range for m=1");
    return {((a0 % p_) + p_) % p_, ((a1 % p_) + p_) % p_};
  }

  bool is_zero(const Elem& a) const { return a.c0 == 0 && a.c1 == 0; }

  Elem add(const Elem& a, const Elem& b) const {
    return {mod(a.c0 + b.c0), mod(a.c1 + b.c1)};
  }
  Elem sub(const Elem& a, const Elem& b) const {
    return {mod(a.c0 - b.c0 + p_), mod(a.c1 - b.c1 + p_)};
  }
  Elem neg(const Elem& a) const { return {mod(p_ - a.c0), mod(p_ - a.c1)}; }

  Elem mul(const Elem& a, const Elem& b) const {
    if (m_ == 1) return {a.c0 * b.c0 % p_, 0};
    std::int64_t t0 = a.c0 * b.c0 % p_;
    std::int64_t t1 = (a.c0 * b.c1 + a.c1 * b.c0) % p_;
    std::int64_t t2 = a.c1 * b.c1 % p_;
    return {mod(t0 + (p_ - r0()) * t2), mod(t1 + (p_ - r1()) * t2)};
  }

  Elem pow(Elem a, std::uint64_t e) const {
    Elem r = one();
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  Elem inv(const Elem& a) const {
    if (is_zero(a)) throw std::invalid_argument("inverse of zero field element");
    return pow(a, static_cast<std::uint64_t>(q() - 2));
  }

  Elem frobenius(const Elem& a) const { return pow(a, static_cast<std::uint64_t>(p_)); }

  std::string format(const Elem& a) const {
    std::ostringstream os;
    os << a.c0;
    if (m_ == 2) os << ',' << a.c1;
    return os.str();
  }

  // Header form "p=3;m=2;mod=1,0,1"
  std::string header() const {
    std::ostringstream os;
    os << "p=" << p_ << ";m=" << m_ << ";mod=";
    for (std::size_t i = 0; i < modulus_.size(); ++i) {
      if (i) os << ',';
      os << modulus_[i];
    }
    return os.str();
  }

  static FieldSpec parse_header(const std::string& line);
  Elem parse(const std::string& text) const;

 private:
  std::int64_t mod(std::int64_t v) const { return v % p_; }

  void validate() const {
    if (p_ < 2 || p_ >= (std::int64_t(1) << 31)) throw std::invalid_argument("p out of range");
    for (std::int64_t d = 2; d * d <= p_; ++d)
      if (p_ % d == 0) throw std::invalid_argument("p is not prime");
    if (m_ != 1 && m_ != 2) throw std::invalid_argument("extension degree must be 1 or 2");
    if (modulus_.size() != static_cast<std::size_t>(m_) + 1)
      throw std::invalid_argument("modulus must have m+1 coefficients");
    for (std::int64_t c : modulus_)
      if (c < 0 || c >= p_) throw std::invalid_argument("modulus coefficient out of range");
    if (modulus_.back() != 1) throw std::invalid_argument("modulus must be monic");
    if (m_ == 2) {
      // irreducibility over F_p by root exhaustion
      for (std::int64_t t = 0; t < p_; ++t) {
        std::int64_t v = ((t * t + modulus_[1] * t) % p_ + modulus_[0]) % p_;
        if (v == 0) throw std::invalid_argument("modulus is reducible over F_p");
      }
    }
  }

  std::int64_t p_;
  int m_;
  std::vector<std::int64_t> modulus_;
};

using FieldSpecPtr = std::shared_ptr<const FieldSpec>;

inline FieldSpecPtr make_spec(FieldSpec s) { return std::make_shared<const FieldSpec>(std::move(s)); }

// Element of F_q bound to its spec.  Shareable value; no interior mutation.
class FieldElem {
 public:
  FieldElem(FieldSpecPtr spec, FqCoeff v) : spec_(std::move(spec)), v_(v) {}
  FieldElem(FieldSpecPtr spec, std::int64_t a0, std::int64_t a1 = 0)
      : spec_(std::move(spec)) {
    v_ = spec_->make(a0, a1);
  }

  const FieldSpecPtr& spec() const { return spec_; }
  const FqCoeff& raw() const { return v_; }
  std::int64_t coord(int i) const { return i == 0 ? v_.c0 : v_.c1; }
  bool is_zero() const { return spec_->is_zero(v_); }

  friend bool operator==(const FieldElem& a, const FieldElem& b) {
    return a.spec_->same(*b.spec_) && a.v_ == b.v_;
  }

  std::string str() const { return spec_->format(v_); }

 private:
  FieldSpecPtr spec_;
  FqCoeff v_;
};

inline void require_same_spec(const FieldElem& a, const FieldElem& b) {
  if (!a.spec()->same(*b.spec()))
    throw std::invalid_argument("field elements belong to different specs");
}

inline FieldElem ff_add(const FieldElem& a, const FieldElem& b) {
  require_same_spec(a, b);
  return FieldElem(a.spec(), a.spec()->add(a.raw(), b.raw()));
}

inline FieldElem ff_sub(const FieldElem& a, const FieldElem& b) {
  require_same_spec(a, b);
  return FieldElem(a.spec(), a.spec()->sub(a.raw(), b.raw()));
}

inline FieldElem ff_mul(const FieldElem& a, const FieldElem& b) {
  require_same_spec(a, b);
  return FieldElem(a.spec(), a.spec()->mul(a.raw(), b.raw()));
}

inline FieldElem ff_inv(const FieldElem& a) {
  return FieldElem(a.spec(), a.spec()->inv(a.raw()));
}

inline FieldElem ff_frobenius(const FieldElem& a) {
  return FieldElem(a.spec(), a.spec()->frobenius(a.raw()));
}

inline FieldElem ff_pow(const FieldElem& a, std::uint64_t e) {
  return FieldElem(a.spec(), a.spec()->pow(a.raw(), e));
}

// --- textual forms ------------------------------------------------------

namespace detail {
inline std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    if (cur.empty()) throw std::invalid_argument("empty list entry in '" + s + "'");
    std::size_t pos = 0;
    std::int64_t v = std::stoll(cur, &pos);
    if (pos != cur.size()) throw std::invalid_argument("bad integer '" + cur + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}
}  // namespace detail

inline FieldSpec FieldSpec::parse_header(const std::string& line) {
  std::int64_t p = -1;
  int m = -1;
  std::vector<std::int64_t> mod;
  std::istringstream is(line);
  std::string part;
  while (std::getline(is, part, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad spec header '" + line + "'");
    std::string key = part.substr(0, eq), val = part.substr(eq + 1);
    if (key == "p")
      p = std::stoll(val);
    else if (key == "m")
      m = std::stoi(val);
    else if (key == "mod")
      mod = detail::parse_int_list(val);
    else
      throw std::invalid_argument("unknown spec header field '" + key + "'");
  }
  if (p < 0 || m < 0 || mod.empty())
    throw std::invalid_argument("incomplete spec header '" + line + "'");
  return FieldSpec(p, m, std::move(mod));
}

inline FqCoeff FieldSpec::parse(const std::string& text) const {
  auto coords = detail::parse_int_list(text);
  if (coords.size() != static_cast<std::size_t>(m_))
    throw std::invalid_argument("element '" + text + "' has wrong coordinate count");
  for (std::int64_t c : coords)
    if (c < 0 || c >= p_) throw std::invalid_argument("coordinate out of range in '" + text + "'");
  return {coords[0], m_ == 2 ? coords[1] : 0};
}

}  // namespace wildram

#endif
