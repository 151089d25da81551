#ifndef WILDRAM_NOTTINGHAM_HPP
#define WILDRAM_NOTTINGHAM_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wildram/power_series.hpp"
#include "wildram/rational_util.hpp"

namespace wildram {

// Wild automorphism of F_q((x)) at finite precision: sigma(x) = x + a_2 x^2 + ...
// The constructor enforces constant term 0 and linear coefficient 1.
class Automorphism {
 public:
  explicit Automorphism(Series s) : series_(std::move(s)) {
    if (series_.precision() < 1)
      throw std::invalid_argument("automorphism needs precision >= 1");
    if (!series_.ctx()->is_zero(series_.coeff(0)))
      throw std::invalid_argument("automorphism must have zero constant term");
    if (!(series_.coeff(1) == series_.ctx()->one()))
      throw std::invalid_argument("automorphism must have linear coefficient 1");
  }

  static Automorphism identity(FieldSpecPtr spec, std::int64_t precision) {
    return Automorphism(Series::identity(std::move(spec), precision));
  }

  const Series& series() const { return series_; }
  const FieldSpecPtr& spec() const { return series_.ctx(); }
  std::int64_t precision() const { return series_.precision(); }

  friend bool operator==(const Automorphism& a, const Automorphism& b) {
    return a.series_ == b.series_;
  }

 private:
  Series series_;
};

inline Automorphism compose(const Automorphism& a, const Automorphism& b) {
  return Automorphism(ps_compose(a.series(), b.series()));
}

inline Automorphism inverse(const Automorphism& a) {
  return Automorphism(ps_comp_inverse(a.series()));
}

// depth(sigma) = v_x(sigma(x)/x - 1); nullopt when sigma is the identity to
// stored precision (a break beyond the horizon cannot be told apart from it).
inline std::optional<std::int64_t> depth(const Automorphism& a) {
  const Series& s = a.series();
  for (std::int64_t k = 2; k <= s.precision(); ++k)
    if (!s.ctx()->is_zero(s.coeff(k))) return k - 1;
  return std::nullopt;
}

// k-fold composition power by binary powering, ~2 log2(k) compositions.
// Z_p exponents are handled by callers as k mod p^K; only finitely many
// digits matter below a fixed break bound.
inline Automorphism group_power(const Automorphism& a, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("group_power: negative exponent");
  Automorphism result = Automorphism::identity(a.spec(), a.precision());
  Automorphism base = a;
  while (k > 0) {
    if (k & 1) result = compose(result, base);
    k >>= 1;
    if (k > 0) base = compose(base, base);
  }
  return result;
}

// Lower break sequence i_0 < i_1 < ... of one automorphism, with the
// precision it was certified at.  values[n] = depth(sigma^{p^n}); entries
// stop at the first power that vanishes to stored precision.
struct BreakSequence {
  std::int64_t p = 0;
  std::vector<std::int64_t> values;
  std::int64_t certified_to = -1;  // last certified index, values.size()-1
  std::int64_t precision_used = 0;

  BreakSequence() = default;
  BreakSequence(std::int64_t p_, std::vector<std::int64_t> v, std::int64_t precision)
      : p(p_), values(std::move(v)), certified_to(static_cast<std::int64_t>(values.size()) - 1),
        precision_used(precision) {
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
      if (values[i] >= values[i + 1])
        throw std::invalid_argument("break sequence must be strictly increasing");
  }

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }

  std::string record() const {
    std::ostringstream os;
    os << "breaks p=" << p << " values=";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) os << ',';
      os << values[i];
    }
    os << " certified_to=" << certified_to << " precision_used=" << precision_used;
    return os.str();
  }
};

struct SenViolation {
  std::int64_t n = 0;
  BigInt modulus;
  BigInt residue;
};

struct SenReport {
  bool pass = true;
  std::int64_t pairs_checked = 0;
  std::optional<SenViolation> first_violation;
};

// Congruence i_{n+1} = i_n (mod p^{n+1}) for every consecutive certified pair.
inline SenReport check_sen_congruence(const BreakSequence& seq) {
  if (seq.size() < 2)
    throw std::invalid_argument("sen check needs at least two certified breaks");
  SenReport rep;
  BigInt mod = seq.p;
  for (std::int64_t n = 0; n + 1 < seq.size(); ++n) {
    BigInt diff = BigInt(seq.values[static_cast<std::size_t>(n + 1)]) -
                  BigInt(seq.values[static_cast<std::size_t>(n)]);
    BigInt res = diff % mod;
    ++rep.pairs_checked;
    if (res != 0) {
      rep.pass = false;
      rep.first_violation = SenViolation{n, mod, res};
      break;
    }
    mod *= seq.p;
  }
  return rep;
}

// i_n(sigma) for n = 0..n_max, certified against stored precision.  The
// returned sequence may be shorter than requested; that signals exhaustion,
// never a guessed value.
inline BreakSequence compute_breaks(const Automorphism& sigma, std::int64_t n_max) {
  if (n_max < 0) throw std::invalid_argument("compute_breaks: n_max must be >= 0");
  std::int64_t p = sigma.spec()->p();
  std::vector<std::int64_t> values;
  Automorphism t = sigma;
  for (std::int64_t n = 0; n <= n_max; ++n) {
    auto d = depth(t);
    if (!d) break;
    values.push_back(*d);
    if (n < n_max) t = group_power(t, p);
  }
  BreakSequence seq(p, std::move(values), sigma.precision());
  if (seq.size() >= 2 && !check_sen_congruence(seq).pass)
    throw std::logic_error("computed break sequence violates the p-power congruence");
  return seq;
}

struct HeightWindow {
  std::int64_t n = 0;     // ratio i_n / i_{n-1}
  Rational ratio;
  double log_p = 0.0;     // display only; classification uses the exact ratio
};

inline std::vector<HeightWindow> height_profile(const BreakSequence& seq) {
  if (seq.size() < 2)
    throw std::invalid_argument("height profile needs at least two certified breaks");
  std::vector<HeightWindow> out;
  for (std::int64_t n = 1; n < seq.size(); ++n) {
    Rational r(seq.values[static_cast<std::size_t>(n)], seq.values[static_cast<std::size_t>(n - 1)]);
    double lg = std::log(r.convert_to<double>()) / std::log(static_cast<double>(seq.p));
    out.push_back({n, r, lg});
  }
  return out;
}

enum class CharClass { Char0, CharP, Inconclusive };

inline const char* to_string(CharClass c) {
  switch (c) {
    case CharClass::Char0: return "char0";
    case CharClass::CharP: return "charp";
    default: return "inconclusive";
  }
}

struct RatioWindow {
  std::int64_t n = 0;  // (i_{n+1} - i_n) / (i_n - i_{n-1})
  Rational ratio;
};

struct GrowthWitness {
  std::int64_t n = 0;  // i_{n+1} >= bound * i_n
  std::int64_t bound_factor = 0;
};

struct Rank1Classification {
  CharClass result = CharClass::Inconclusive;
  std::int64_t window_start = 1;
  std::vector<RatioWindow> ratios;     // inspected difference-ratio windows
  std::vector<GrowthWitness> growth;   // windows meeting the char-p growth bound
};

// Cyclic (Z_p) dichotomy from finite data.  Char0 evidence: the difference
// ratio equals p exactly on every inspected window (n >= window_start).
// CharP evidence: some window grows by at least p^2-p+1.  Labels describe
// the observed window, not the limit.
inline Rank1Classification classify_zp(const BreakSequence& seq, std::int64_t window_start = 1) {
  if (seq.size() < 3)
    throw std::invalid_argument("rank-1 classification needs at least three certified breaks");
  Rank1Classification out;
  out.window_start = window_start;

  bool all_p = true;
  for (std::int64_t n = 1; n + 1 < seq.size(); ++n) {
    if (n < window_start) continue;
    Rational r(seq.values[static_cast<std::size_t>(n + 1)] - seq.values[static_cast<std::size_t>(n)],
               seq.values[static_cast<std::size_t>(n)] - seq.values[static_cast<std::size_t>(n - 1)]);
    out.ratios.push_back({n, r});
    if (r != Rational(seq.p)) all_p = false;
  }

  std::int64_t bound = seq.p * seq.p - seq.p + 1;
  for (std::int64_t n = 0; n + 1 < seq.size(); ++n)
    if (seq.values[static_cast<std::size_t>(n + 1)] >= bound * seq.values[static_cast<std::size_t>(n)])
      out.growth.push_back({n, bound});

  if (!out.ratios.empty() && all_p)
    out.result = CharClass::Char0;
  else if (!out.growth.empty())
    out.result = CharClass::CharP;
  else
    out.result = CharClass::Inconclusive;
  return out;
}

struct Rank1RamIndex {
  Rational e;                      // last-window value of (i_{n+1} - i_n) / p^{n+1}
  bool consistent = false;         // equal across windows and a positive integer
  std::vector<Rational> windows;
};

// Absolute ramification index of the base field under the char-0 reading:
// e = (i_{n+1} - i_n) / p^{n+1}.  Requires a Char0-classified sequence.
inline Rank1RamIndex ram_index_zp(const BreakSequence& seq, std::int64_t window_start = 1) {
  if (classify_zp(seq, window_start).result != CharClass::Char0)
    throw std::invalid_argument("ram_index_zp requires a Char0-classified sequence");
  Rank1RamIndex out;
  BigInt pk = seq.p;
  for (std::int64_t n = 0; n + 1 < seq.size(); ++n) {
    out.windows.emplace_back(BigInt(seq.values[static_cast<std::size_t>(n + 1)] -
                                    seq.values[static_cast<std::size_t>(n)]),
                             pk);
    pk *= seq.p;
  }
  out.e = out.windows.back();
  out.consistent = out.e > 0 && denominator(out.e) == 1;
  for (const auto& w : out.windows)
    if (w != out.e) out.consistent = false;
  return out;
}

}  // namespace wildram

#endif
