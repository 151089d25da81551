#ifndef WILDRAM_RAMIFICATION_HPP
#define WILDRAM_RAMIFICATION_HPP

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wildram/nottingham.hpp"
#include "wildram/rational_util.hpp"

namespace wildram {

// --- exact piecewise-linear functions ------------------------------------

// Continuous strictly increasing piecewise-linear function through (0,0),
// exact rational knots.  slopes[i] applies on [knots[i].x, knots[i+1].x);
// the last slope extends beyond the last knot.
class PiecewiseLinearFn {
 public:
  struct Knot {
    Rational x, y;
  };

  PiecewiseLinearFn(std::vector<Knot> knots, std::vector<Rational> slopes)
      : knots_(std::move(knots)), slopes_(std::move(slopes)) {
    if (knots_.empty() || knots_[0].x != 0 || knots_[0].y != 0)
      throw std::invalid_argument("piecewise-linear function must start at (0,0)");
    if (slopes_.size() != knots_.size())
      throw std::invalid_argument("need one slope per knot (last one open-ended)");
    for (const auto& s : slopes_)
      if (s <= 0) throw std::invalid_argument("slopes must be positive");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      if (knots_[i].x >= knots_[i + 1].x)
        throw std::invalid_argument("knot abscissas must be strictly increasing");
      Rational expect = knots_[i].y + slopes_[i] * (knots_[i + 1].x - knots_[i].x);
      if (expect != knots_[i + 1].y)
        throw std::invalid_argument("knots and slopes are inconsistent (discontinuity)");
    }
  }

  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<Rational>& slopes() const { return slopes_; }

  Rational eval(const Rational& r) const {
    if (r < 0) throw std::invalid_argument("evaluation at negative argument");
    std::size_t i = knots_.size() - 1;
    while (i > 0 && knots_[i].x > r) --i;
    return knots_[i].y + slopes_[i] * (r - knots_[i].x);
  }

  // Inverse function: swap coordinates, invert slopes.
  PiecewiseLinearFn inverse() const {
    std::vector<Knot> k;
    std::vector<Rational> s;
    k.reserve(knots_.size());
    s.reserve(slopes_.size());
    for (const auto& kn : knots_) k.push_back({kn.y, kn.x});
    for (const auto& sl : slopes_) s.emplace_back(1 / sl);
    return PiecewiseLinearFn(std::move(k), std::move(s));
  }

  std::string record(const std::string& name) const {
    std::ostringstream os;
    os << name << " knots=";
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (i) os << ',';
      os << to_string(knots_[i].x) << ':' << to_string(knots_[i].y);
    }
    os << " slopes=";
    for (std::size_t i = 0; i < slopes_.size(); ++i) {
      if (i) os << ',';
      os << to_string(slopes_[i]);
    }
    return os.str();
  }

 private:
  std::vector<Knot> knots_;
  std::vector<Rational> slopes_;
};

// --- filtration tables ----------------------------------------------------

// Lower-numbering filtration data: [G : G[b + eps]] = index_after at each
// break b.  Successive index jumps must be p or p^2.
struct FiltrationLevel {
  std::int64_t brk = 0;
  BigInt index_after;
};

struct FiltrationTable {
  int rank = 1;
  std::int64_t p = 0;
  std::vector<FiltrationLevel> levels;

  void validate() const {
    if (p < 2) throw std::invalid_argument("filtration table: bad p");
    if (rank != 1 && rank != 2) throw std::invalid_argument("filtration table: rank must be 1 or 2");
    BigInt prev = 1;
    std::int64_t prev_brk = -1;
    for (const auto& lv : levels) {
      if (lv.brk <= prev_brk) throw std::invalid_argument("filtration breaks must be strictly increasing");
      if (lv.index_after <= prev || lv.index_after % prev != 0)
        throw std::invalid_argument("filtration indices must strictly increase and divide");
      BigInt ratio = lv.index_after / prev;
      if (ratio != p && ratio != BigInt(p) * p)
        throw std::invalid_argument("filtration index jump must be p or p^2");
      prev = lv.index_after;
      prev_brk = lv.brk;
    }
  }

  std::string record() const {
    std::ostringstream os;
    os << "filtration rank=" << rank << " p=" << p << " levels=";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i) os << ',';
      os << levels[i].brk << ':' << levels[i].index_after;
    }
    return os.str();
  }
};

// Rank-1 table of the closed group generated by one automorphism:
// [<sigma> : <sigma>[i_n + eps]] = p^{n+1}.
inline FiltrationTable filtration_from_breaks(const BreakSequence& seq) {
  FiltrationTable t;
  t.rank = 1;
  t.p = seq.p;
  BigInt idx = 1;
  for (std::int64_t v : seq.values) {
    idx *= seq.p;
    t.levels.push_back({v, idx});
  }
  t.validate();
  return t;
}

// phi_G as exact piecewise-linear function: slope 1/[G : G[t]] between
// breaks.  horizon records how far the table is claimed complete; beyond the
// last break the final slope extends.
inline PiecewiseLinearFn phi_function(const FiltrationTable& t, const Rational& horizon) {
  t.validate();
  if (!t.levels.empty() && horizon < t.levels.back().brk)
    throw std::invalid_argument("phi horizon must reach the last break");
  std::vector<PiecewiseLinearFn::Knot> knots{{Rational(0), Rational(0)}};
  std::vector<Rational> slopes{Rational(1)};
  Rational x(0), y(0), slope(1);
  for (const auto& lv : t.levels) {
    y += slope * (Rational(lv.brk) - x);
    x = Rational(lv.brk);
    slope = Rational(BigInt(1), lv.index_after);
    if (knots.back().x != x) {
      knots.push_back({x, y});
      slopes.push_back(slope);
    } else {
      slopes.back() = slope;  // break at 0: replace initial slope
    }
  }
  return PiecewiseLinearFn(std::move(knots), std::move(slopes));
}

// psi = phi^{-1}, evaluated exactly: psi(phi(r)) = r in rational arithmetic.
inline Rational psi_eval(const PiecewiseLinearFn& phi, const Rational& r) {
  if (r < 0) throw std::invalid_argument("psi evaluated at negative argument");
  return phi.inverse().eval(r);
}

// --- gamma estimates -------------------------------------------------------

struct GammaEstimate {
  std::vector<Rational> primary;    // (i_{n+1} - i_n) / ((p^2-1) p^{2n})
  std::vector<Rational> secondary;  // i_n / p^{2n}
  bool stable = false;              // primary constant across windows
  Rational value;                   // last primary window
};

inline GammaEstimate gamma_estimates(const BreakSequence& seq) {
  if (seq.size() < 2)
    throw std::invalid_argument("gamma estimate needs at least two certified breaks");
  GammaEstimate g;
  BigInt p2(seq.p);
  p2 *= seq.p;
  BigInt denom = p2 - 1, pw = 1;
  for (std::int64_t n = 0; n + 1 < seq.size(); ++n) {
    g.primary.emplace_back(BigInt(seq.values[static_cast<std::size_t>(n + 1)] -
                                  seq.values[static_cast<std::size_t>(n)]),
                           denom * pw);
    pw *= p2;
  }
  pw = 1;
  for (std::int64_t n = 0; n < seq.size(); ++n) {
    g.secondary.emplace_back(BigInt(seq.values[static_cast<std::size_t>(n)]), pw);
    pw *= p2;
  }
  g.value = g.primary.back();
  g.stable = std::all_of(g.primary.begin(), g.primary.end(),
                         [&](const Rational& r) { return r == g.value; });
  return g;
}

// --- rank-two profiles ------------------------------------------------------

enum class DepthPattern { Depth2, Depth1, Irregular };

inline const char* to_string(DepthPattern d) {
  switch (d) {
    case DepthPattern::Depth2: return "depth2";
    case DepthPattern::Depth1: return "depth1";
    default: return "irregular";
  }
}

struct DepthFinding {
  DepthPattern pattern = DepthPattern::Irregular;
  std::int64_t n = 0, m = 0;  // alignment offsets into sigma / tau sequences
  bool sigma_leads = true;    // depth 1: whether sigma's breaks come first
  std::string note;
};

namespace detail {

inline bool tails_equal(const BreakSequence& s, const BreakSequence& t, std::int64_t n,
                        std::int64_t m) {
  std::int64_t len = std::min(s.size() - n, t.size() - m);
  if (len < 2) return false;
  for (std::int64_t j = 0; j < len; ++j)
    if (s.values[static_cast<std::size_t>(n + j)] != t.values[static_cast<std::size_t>(m + j)])
      return false;
  return true;
}

// i_{n+j}(s) < i_{m+j}(t) < i_{n+j+1}(s) over the whole certified overlap
inline bool interleaves(const BreakSequence& s, const BreakSequence& t, std::int64_t n,
                        std::int64_t m) {
  std::int64_t triples = std::min(s.size() - n - 1, t.size() - m);
  if (triples < 2) return false;
  for (std::int64_t j = 0; j < triples; ++j) {
    std::int64_t lo = s.values[static_cast<std::size_t>(n + j)];
    std::int64_t mid = t.values[static_cast<std::size_t>(m + j)];
    std::int64_t hi = s.values[static_cast<std::size_t>(n + j + 1)];
    if (!(lo < mid && mid < hi)) return false;
  }
  return true;
}

}  // namespace detail

// Depth dichotomy of a Z_p x Z_p pair from the two break sequences: tails
// coincide under some alignment (depth 2) or strictly interleave (depth 1).
// When both gamma estimates are stable the parity of log_p(g1/g2) is used as
// a cross-check; disagreement demotes the finding to Irregular.
inline DepthFinding find_depth_pattern(const BreakSequence& s, const BreakSequence& t,
                                       const GammaEstimate* gs = nullptr,
                                       const GammaEstimate* gt = nullptr) {
  if (s.size() < 3 || t.size() < 3)
    throw std::invalid_argument("depth classification needs three certified breaks per generator");
  DepthFinding out;
  for (std::int64_t n = 0; n < s.size() && out.pattern == DepthPattern::Irregular; ++n)
    for (std::int64_t m = 0; m < t.size(); ++m)
      if (detail::tails_equal(s, t, n, m)) {
        out = {DepthPattern::Depth2, n, m, true, ""};
        break;
      }
  if (out.pattern == DepthPattern::Irregular) {
    for (std::int64_t n = 0; n < s.size() && out.pattern == DepthPattern::Irregular; ++n)
      for (std::int64_t m = 0; m < t.size(); ++m) {
        if (detail::interleaves(s, t, n, m)) {
          out = {DepthPattern::Depth1, n, m, true, ""};
          break;
        }
        if (detail::interleaves(t, s, m, n)) {
          out = {DepthPattern::Depth1, n, m, false, ""};
          break;
        }
      }
  }
  if (out.pattern != DepthPattern::Irregular && gs && gt && gs->stable && gt->stable) {
    auto lg = log_p_exact(gs->value / gt->value, s.p);
    if (!lg) {
      out.pattern = DepthPattern::Irregular;
      out.note = "gamma ratio is not an exact power of p";
    } else {
      bool even = (*lg % 2) == 0;
      bool want_depth2 = out.pattern == DepthPattern::Depth2;
      if (even != want_depth2) {
        out.pattern = DepthPattern::Irregular;
        out.note = "observed pattern contradicts gamma parity";
      }
    }
  }
  return out;
}

struct ComboSequence {
  std::int64_t a = 0, b = 0;
  BreakSequence seq;
};

struct RankTwoProfile {
  BreakSequence seq_sigma, seq_tau;
  std::vector<ComboSequence> combos;  // sampled sigma^a tau^b, primitive (a,b) mod p
  GammaEstimate gamma_sigma, gamma_tau;
  DepthFinding depth;
};

struct ProfileOptions {
  std::int64_t n_max = 2;
  bool sample_combinations = true;  // all primitive (a,b) mod p beyond the generators
};

inline RankTwoProfile build_rank2_profile(const Automorphism& sigma, const Automorphism& tau,
                                          const ProfileOptions& opt = {}) {
  if (!sigma.spec()->same(*tau.spec()))
    throw std::invalid_argument("generators live over different fields");
  RankTwoProfile prof;
  prof.seq_sigma = compute_breaks(sigma, opt.n_max);
  prof.seq_tau = compute_breaks(tau, opt.n_max);

  if (opt.sample_combinations) {
    std::int64_t p = sigma.spec()->p();
    std::vector<Automorphism> sp{Automorphism::identity(sigma.spec(), sigma.precision())};
    std::vector<Automorphism> tp{Automorphism::identity(tau.spec(), tau.precision())};
    for (std::int64_t a = 1; a < p; ++a) sp.push_back(compose(sp.back(), sigma));
    for (std::int64_t b = 1; b < p; ++b) tp.push_back(compose(tp.back(), tau));
    for (std::int64_t a = 0; a < p; ++a)
      for (std::int64_t b = 0; b < p; ++b) {
        if ((a == 0 && b == 0) || (a == 1 && b == 0) || (a == 0 && b == 1)) continue;
        Automorphism g = compose(sp[static_cast<std::size_t>(a)], tp[static_cast<std::size_t>(b)]);
        prof.combos.push_back({a, b, compute_breaks(g, opt.n_max)});
      }
  }

  if (prof.seq_sigma.size() >= 2) prof.gamma_sigma = gamma_estimates(prof.seq_sigma);
  if (prof.seq_tau.size() >= 2) prof.gamma_tau = gamma_estimates(prof.seq_tau);
  if (prof.seq_sigma.size() >= 3 && prof.seq_tau.size() >= 3)
    prof.depth = find_depth_pattern(prof.seq_sigma, prof.seq_tau,
                                    &prof.gamma_sigma, &prof.gamma_tau);
  return prof;
}

// --- rank-two characteristic classification ---------------------------------

struct ElementEvidence {
  std::string label;
  bool tested = false;  // needs >= 3 certified breaks
  std::vector<RatioWindow> ratios;
  std::vector<GrowthWitness> growth;
  bool all_p2 = false;
};

struct Rank2Classification {
  CharClass result = CharClass::Inconclusive;
  std::int64_t window_start = 1;
  std::vector<ElementEvidence> elements;
  std::int64_t tested_count = 0, skipped_count = 0;
};

// Z_p x Z_p dichotomy from finite data over the generators and the sampled
// combinations.  Char0 evidence: every tested element has difference ratio
// exactly p^2 on all inspected windows.  CharP evidence: some element grows
// by at least p^3 - p^2 + 1 on a window.  Elements without three certified
// breaks are reported but not tested.
inline Rank2Classification classify_zp2(const RankTwoProfile& prof, std::int64_t window_start = 1) {
  if (prof.seq_sigma.size() < 3 || prof.seq_tau.size() < 3)
    throw std::invalid_argument("rank-2 classification needs three certified breaks per generator");
  std::int64_t p = prof.seq_sigma.p;
  Rational p2(BigInt(p) * p);
  std::int64_t growth_bound = p * p * p - p * p + 1;

  Rank2Classification out;
  out.window_start = window_start;
  bool all_char0 = true, any_charp = false;

  auto inspect = [&](const std::string& label, const BreakSequence& seq) {
    ElementEvidence ev;
    ev.label = label;
    if (seq.size() >= 3) {
      ev.tested = true;
      ev.all_p2 = true;
      for (std::int64_t n = 1; n + 1 < seq.size(); ++n) {
        if (n < window_start) continue;
        Rational r(seq.values[static_cast<std::size_t>(n + 1)] - seq.values[static_cast<std::size_t>(n)],
                   seq.values[static_cast<std::size_t>(n)] - seq.values[static_cast<std::size_t>(n - 1)]);
        ev.ratios.push_back({n, r});
        if (r != p2) ev.all_p2 = false;
      }
      if (ev.ratios.empty()) ev.all_p2 = false;
    }
    for (std::int64_t n = 0; n + 1 < seq.size(); ++n)
      if (seq.values[static_cast<std::size_t>(n + 1)] >=
          growth_bound * seq.values[static_cast<std::size_t>(n)])
        ev.growth.push_back({n, growth_bound});
    if (ev.tested) {
      ++out.tested_count;
      if (!ev.all_p2) all_char0 = false;
    } else {
      ++out.skipped_count;
    }
    if (!ev.growth.empty()) any_charp = true;
    out.elements.push_back(std::move(ev));
  };

  inspect("sigma", prof.seq_sigma);
  inspect("tau", prof.seq_tau);
  for (const auto& c : prof.combos) {
    std::ostringstream label;
    label << "sigma^" << c.a << "tau^" << c.b;
    inspect(label.str(), c.seq);
  }

  if (any_charp && !all_char0)
    out.result = CharClass::CharP;
  else if (all_char0 && out.tested_count > 0)
    out.result = CharClass::Char0;
  else
    out.result = CharClass::Inconclusive;
  return out;
}

// --- joint filtration of <sigma, tau> ---------------------------------------

struct DirectionEvidence {
  std::int64_t a = 0, b = 0;  // primitive direction mod p
  bool escaped = false;
  std::string how;  // deep | beyond-precision | congruence-bound | stuck
  std::optional<std::int64_t> last_depth;
};

struct JointFiltration {
  FiltrationTable table;
  std::int64_t p = 0, bound = 0, level = 0;  // level: exponent grid is [0, p^level)^2
  std::int64_t grid_total = 0;
  bool certificate_ok = false;   // every primitive direction escaped, no collision
  bool collision = false;        // two distinct exponent pairs gave the same series
  bool structure_ok = true;      // depth bins formed a valid subgroup chain
  bool shape_product_form = true;  // stabilizers look like <sigma^{p^s}, tau^{p^t}>
  std::vector<DirectionEvidence> directions;
  std::string note;

  std::string record() const {
    std::ostringstream os;
    os << table.record() << " level=" << level << " bound=" << bound
       << " certificate=" << (certificate_ok ? "pass" : "fail")
       << " collision=" << (collision ? 1 : 0) << " structure=" << (structure_ok ? "ok" : "bad")
       << " product_form=" << (shape_product_form ? 1 : 0);
    return os.str();
  }
};

struct JointFiltrationOptions {
  std::int64_t level = 2;      // starting exponent depth K
  std::int64_t max_level = 4;  // auto-increment budget
  bool parallel = true;
};

namespace detail {

template <class F>
void parallel_for(std::int64_t n, bool parallel, F&& body) {
  if (!parallel || n < 4) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  unsigned hw = std::thread::hardware_concurrency();
  std::int64_t workers = std::min<std::int64_t>(hw ? hw : 2, 8);
  workers = std::min(workers, n);
  std::vector<std::future<void>> futs;
  for (std::int64_t w = 0; w < workers; ++w)
    futs.push_back(std::async(std::launch::async, [&, w] {
      for (std::int64_t i = w; i < n; i += workers) body(i);
    }));
  for (auto& f : futs) f.get();
}

inline std::optional<std::int64_t> series_depth(const Series& s) {
  for (std::int64_t k = 2; k <= s.precision(); ++k)
    if (!s.ctx()->is_zero(s.coeff(k))) return k - 1;
  return std::nullopt;
}

inline std::int64_t v_p(std::int64_t a, std::int64_t p, std::int64_t cap) {
  if (a == 0) return cap;
  std::int64_t v = 0;
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  return v;
}

}  // namespace detail

// Exhaustive coset enumeration of G = <sigma, tau> mod p^K: computes
// i(sigma^a tau^b) over the exponent grid, bins the depths, and returns all
// breaks <= bound with exact indices.
//
// Completeness certificate, per primitive direction (a, b) mod p with
// g = sigma^a tau^b and in-grid powers g^{p^j}, j < K:
//   - some computed depth exceeds bound (depths strictly increase along
//     p-powers, so everything deeper stays out of range), or
//   - some power vanished to stored precision (its depth already exceeds
//     bound because precision >= bound + 2), or
//   - the last in-grid depth d satisfies d + p^K > bound (the p-power
//     congruence forces the next depth to d + p^K at least).
// A direction with none of these is "stuck": K is too small, and the level
// auto-increments up to max_level.
//
// Degenerate input (generators not independent) is witnessed by two distinct
// exponent pairs producing the same series; that sets `collision` and fails
// the certificate immediately, since the exponent grid then no longer
// represents the group and every index below would be miscounted.
inline JointFiltration joint_filtration(const Automorphism& sigma, const Automorphism& tau,
                                        std::int64_t bound,
                                        const JointFiltrationOptions& opt = {}) {
  if (!sigma.spec()->same(*tau.spec()))
    throw std::invalid_argument("generators live over different fields");
  if (bound < 1) throw std::invalid_argument("bound must be >= 1");
  std::int64_t precision = std::min(sigma.precision(), tau.precision());
  if (precision < bound + 2)
    throw std::invalid_argument("joint filtration needs precision >= bound + 2");
  std::int64_t p = sigma.spec()->p();
  if (opt.level < 1 || opt.max_level < opt.level)
    throw std::invalid_argument("bad level options");

  JointFiltration out;
  out.p = p;
  out.bound = bound;

  std::vector<std::optional<std::int64_t>> depths;
  std::int64_t side = 0;

  for (std::int64_t K = opt.level; K <= opt.max_level; ++K) {
    side = 1;
    for (std::int64_t i = 0; i < K; ++i) {
      side *= p;
      if (side * side > (std::int64_t(1) << 22))
        throw std::invalid_argument("exponent grid too large for exhaustive enumeration");
    }
    out.level = K;
    out.grid_total = side * side;

    std::vector<Series> sig_pows, tau_pows;
    sig_pows.reserve(static_cast<std::size_t>(side));
    tau_pows.reserve(static_cast<std::size_t>(side));
    sig_pows.push_back(Series::identity(sigma.spec(), precision));
    tau_pows.push_back(Series::identity(tau.spec(), precision));
    for (std::int64_t i = 1; i < side; ++i) {
      sig_pows.push_back(ps_compose(sig_pows.back(), sigma.series()));
      tau_pows.push_back(ps_compose(tau_pows.back(), tau.series()));
    }

    std::vector<Series> grid(static_cast<std::size_t>(side * side),
                             Series::zero(sigma.spec(), 0));
    detail::parallel_for(side, opt.parallel, [&](std::int64_t a) {
      for (std::int64_t b = 0; b < side; ++b) {
        std::size_t idx = static_cast<std::size_t>(a * side + b);
        if (a == 0)
          grid[idx] = tau_pows[static_cast<std::size_t>(b)];
        else if (b == 0)
          grid[idx] = sig_pows[static_cast<std::size_t>(a)];
        else
          grid[idx] = ps_compose(sig_pows[static_cast<std::size_t>(a)],
                                 tau_pows[static_cast<std::size_t>(b)]);
      }
    });

    depths.assign(grid.size(), std::nullopt);
    for (std::size_t i = 0; i < grid.size(); ++i) depths[i] = detail::series_depth(grid[i]);

    // collision scan over non-vanishing entries
    out.collision = false;
    std::map<std::vector<std::int64_t>, std::size_t> seen;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!depths[i]) continue;
      std::vector<std::int64_t> key;
      key.reserve(grid[i].coeffs().size() * 2);
      for (const auto& c : grid[i].coeffs()) {
        key.push_back(c.c0);
        key.push_back(c.c1);
      }
      auto [it, fresh] = seen.emplace(std::move(key), i);
      if (!fresh) {
        out.collision = true;
        std::size_t w = static_cast<std::size_t>(side);
        std::ostringstream os;
        os << "exponents (" << it->second / w << ',' << it->second % w << ") and (" << i / w
           << ',' << i % w << ") give the same automorphism";
        out.note = os.str();
        break;
      }
    }

    out.directions.clear();
    bool all_escaped = true;
    const std::int64_t pK = side;  // p^K
    for (std::int64_t a0 = 0; a0 < p; ++a0)
      for (std::int64_t b0 = 0; b0 < p; ++b0) {
        if (a0 == 0 && b0 == 0) continue;
        DirectionEvidence ev{a0, b0, false, "stuck", std::nullopt};
        std::int64_t ea = a0, eb = b0;
        std::optional<std::int64_t> last;
        bool beyond = false;
        for (std::int64_t j = 0; j < K; ++j) {
          auto d = depths[static_cast<std::size_t>(ea * side + eb)];
          if (d) {
            last = d;
            if (*d > bound) {
              ev.escaped = true;
              ev.how = "deep";
            }
          } else {
            beyond = true;
          }
          ea *= p;
          eb *= p;
        }
        ev.last_depth = last;
        if (!ev.escaped && beyond) {
          ev.escaped = true;
          ev.how = "beyond-precision";
        }
        if (!ev.escaped && last && *last + pK > bound) {  // next depth >= d_{K-1} + p^K
          ev.escaped = true;
          ev.how = "congruence-bound";
        }
        if (!ev.escaped) all_escaped = false;
        out.directions.push_back(ev);
      }

    out.certificate_ok = all_escaped && !out.collision;
    if (out.certificate_ok || out.collision) break;
    if (K == opt.max_level) {
      if (out.note.empty()) out.note = "level budget exhausted before every direction escaped";
      break;
    }
  }

  // depth bins -> filtration levels
  std::vector<std::int64_t> breaks;
  for (const auto& d : depths)
    if (d && *d <= bound) breaks.push_back(*d);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  out.table.rank = 2;
  out.table.p = p;
  out.structure_ok = true;
  for (std::int64_t b : breaks) {
    std::int64_t stay = 0;
    for (const auto& d : depths)
      if (!d || *d > b) ++stay;
    if (stay == 0 || out.grid_total % stay != 0) {
      out.structure_ok = false;
      out.note = "depth bins are not subgroup-sized";
      break;
    }
    out.table.levels.push_back({b, BigInt(out.grid_total / stay)});
  }
  if (out.structure_ok) {
    try {
      out.table.validate();
    } catch (const std::invalid_argument& e) {
      out.structure_ok = false;
      out.note = e.what();
    }
  }

  // product-form check: the stabilizer of each level must be a full
  // sub-grid {p^s | a} x {p^t | b}; anything else breaks the
  // <sigma^{p^s}, tau^{p^t}> shape downstream index formulas assume.
  out.shape_product_form = true;
  for (std::int64_t b : breaks) {
    std::int64_t s = out.level, t = out.level, count = 0;
    for (std::int64_t a = 0; a < side; ++a)
      for (std::int64_t c = 0; c < side; ++c) {
        auto d = depths[static_cast<std::size_t>(a * side + c)];
        if (d && *d <= b) continue;
        ++count;
        s = std::min(s, detail::v_p(a, p, out.level));
        t = std::min(t, detail::v_p(c, p, out.level));
      }
    BigInt expect = big_pow(BigInt(p), static_cast<std::uint64_t>(out.level - s)) *
                    big_pow(BigInt(p), static_cast<std::uint64_t>(out.level - t));
    if (expect != count) {
      out.shape_product_form = false;
      break;
    }
    bool member_ok = true;
    std::int64_t ps = 1, pt = 1;
    for (std::int64_t i = 0; i < s; ++i) ps *= p;
    for (std::int64_t i = 0; i < t; ++i) pt *= p;
    for (std::int64_t a = 0; a < side && member_ok; ++a)
      for (std::int64_t c = 0; c < side; ++c) {
        auto d = depths[static_cast<std::size_t>(a * side + c)];
        if (d && *d <= b) continue;
        if (a % ps != 0 || c % pt != 0) {
          member_ok = false;
          break;
        }
      }
    if (!member_ok) {
      out.shape_product_form = false;
      break;
    }
  }

  return out;
}

// --- rank-two ramification index ---------------------------------------------

enum class RamIndexStatus { Ok, GammaUnstable, RatioNotPowerOfP, ProductNotSquare };

inline const char* to_string(RamIndexStatus s) {
  switch (s) {
    case RamIndexStatus::Ok: return "ok";
    case RamIndexStatus::GammaUnstable: return "gamma-unstable";
    case RamIndexStatus::RatioNotPowerOfP: return "gamma-ratio-not-power-of-p";
    default: return "gamma-product-not-square";
  }
}

struct Rank2RamIndex {
  RamIndexStatus status = RamIndexStatus::Ok;
  DepthPattern branch = DepthPattern::Irregular;  // decided by parity, not by observation
  std::int64_t log_ratio = 0;                     // log_p(gamma1/gamma2)
  std::int64_t a = 0;  // depth 1: unique integer in (s/2, 1 + s/2); depth 2: s/2
  Rational gamma1, gamma2, e;
  bool remark_identity_ok = false;  // depth 2: both closed forms agree
  bool hypothesis_flag = false;     // filtration contradicts the product-form assumption
  std::string note;
};

inline Rational rational_p_pow(std::int64_t p, std::int64_t k) {
  BigInt v = big_pow(BigInt(p), static_cast<std::uint64_t>(k < 0 ? -k : k));
  return k < 0 ? Rational(BigInt(1), v) : Rational(v);
}

// Both closed forms of e agree when log_p(g1/g2) = 2a:
// (p^2-1)/p^2 sqrt(g1 g2) = (p-1)/p^{a+1} g1 + (p-1)/p^{2-a} g2.
inline bool remark_identity_holds(std::int64_t p, const Rational& g1, const Rational& g2) {
  auto lg = log_p_exact(g1 / g2, p);
  if (!lg || *lg % 2 != 0) throw std::invalid_argument("remark identity needs even log_p(g1/g2)");
  std::int64_t a = *lg / 2;
  auto root = exact_sqrt(g1 * g2);
  if (!root) return false;
  Rational lhs = Rational(BigInt(p) * p - 1, BigInt(p) * p) * (*root);
  Rational rhs = Rational(p - 1) / rational_p_pow(p, a + 1) * g1 +
                 Rational(p - 1) / rational_p_pow(p, 2 - a) * g2;
  return lhs == rhs;
}

// Absolute ramification index of the base field from the two gamma limits,
// branching on the exact parity of log_p(gamma1/gamma2).  The optional joint
// filtration feeds the hypothesis flag: when its stabilizers are not of
// product form the closed formulas are known to misreport, so the value is
// returned flagged rather than trusted.
inline Rank2RamIndex ram_index_zp2(const RankTwoProfile& prof,
                                   const JointFiltration* filtration = nullptr,
                                   std::int64_t window_start = 1) {
  if (classify_zp2(prof, window_start).result != CharClass::Char0)
    throw std::invalid_argument("ram_index_zp2 requires a Char0-classified profile");
  std::int64_t p = prof.seq_sigma.p;

  Rank2RamIndex out;
  if (filtration)
    out.hypothesis_flag = !filtration->shape_product_form || !filtration->structure_ok;

  if (!prof.gamma_sigma.stable || !prof.gamma_tau.stable) {
    out.status = RamIndexStatus::GammaUnstable;
    out.note = "gamma estimates vary across windows";
    return out;
  }
  out.gamma1 = prof.gamma_sigma.value;
  out.gamma2 = prof.gamma_tau.value;

  auto lg = log_p_exact(out.gamma1 / out.gamma2, p);
  if (!lg) {
    out.status = RamIndexStatus::RatioNotPowerOfP;
    out.note = "gamma1/gamma2 is not an exact power of p";
    return out;
  }
  out.log_ratio = *lg;

  if (*lg % 2 == 0) {
    out.branch = DepthPattern::Depth2;
    out.a = *lg / 2;
    auto root = exact_sqrt(out.gamma1 * out.gamma2);
    if (!root) {
      out.status = RamIndexStatus::ProductNotSquare;
      out.note = "gamma1*gamma2 has no exact rational square root";
      return out;
    }
    out.e = Rational(BigInt(p) * p - 1, BigInt(p) * p) * (*root);
    out.remark_identity_ok = remark_identity_holds(p, out.gamma1, out.gamma2);
  } else {
    out.branch = DepthPattern::Depth1;
    out.a = (*lg + 1) / 2;
    out.e = Rational(p - 1) / rational_p_pow(p, out.a + 1) * out.gamma1 +
            Rational(p - 1) / rational_p_pow(p, 2 - out.a) * out.gamma2;
  }

  if (prof.depth.pattern != DepthPattern::Irregular && prof.depth.pattern != out.branch)
    out.note = "observed break pattern disagrees with the parity branch";
  return out;
}

}  // namespace wildram

#endif
