#ifndef WILDRAM_POWER_SERIES_HPP
#define WILDRAM_POWER_SERIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wildram/finite_field.hpp"

namespace wildram {

// Truncated power series over a coefficient ring Ctx.  Coefficients of
// x^0 .. x^N are stored; N is the precision.  Operations never extend
// precision: binary ops produce min(N_a, N_b).  Values are immutable in
// spirit — every operation returns a fresh series — so instances can be
// shared freely across threads.
template <class Ctx>
class SeriesT {
 public:
  using Elem = typename Ctx::Elem;
  using CtxPtr = std::shared_ptr<const Ctx>;

  SeriesT(CtxPtr ctx, std::int64_t precision)
      : ctx_(std::move(ctx)), coeffs_(check_precision(precision) + 1, ctx_->zero()) {}

  SeriesT(CtxPtr ctx, std::vector<Elem> coeffs) : ctx_(std::move(ctx)), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw std::invalid_argument("series needs at least one coefficient");
  }

  static SeriesT zero(CtxPtr ctx, std::int64_t precision) { return SeriesT(std::move(ctx), precision); }

  static SeriesT identity(CtxPtr ctx, std::int64_t precision) {  // the series x
    SeriesT s(ctx, precision);
    if (precision >= 1) s.coeffs_[1] = ctx->one();
    return s;
  }

  const CtxPtr& ctx() const { return ctx_; }
  std::int64_t precision() const { return static_cast<std::int64_t>(coeffs_.size()) - 1; }
  const Elem& coeff(std::int64_t k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  void set_coeff(std::int64_t k, const Elem& v) { coeffs_[static_cast<std::size_t>(k)] = v; }
  const std::vector<Elem>& coeffs() const { return coeffs_; }

  SeriesT truncated(std::int64_t n) const {
    if (n >= precision()) return *this;
    std::vector<Elem> c(coeffs_.begin(), coeffs_.begin() + n + 1);
    return SeriesT(ctx_, std::move(c));
  }

  friend bool operator==(const SeriesT& a, const SeriesT& b) {
    return a.precision() == b.precision() && a.coeffs_ == b.coeffs_;
  }

 private:
  static std::int64_t check_precision(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("negative precision");
    return n;
  }

  CtxPtr ctx_;
  std::vector<Elem> coeffs_;
};

using Series = SeriesT<FieldSpec>;

namespace detail {

template <class Ctx>
void require_same_ctx(const SeriesT<Ctx>& a, const SeriesT<Ctx>& b) {
  if (!a.ctx()->same(*b.ctx())) throw std::invalid_argument("series contexts differ");
}

}  // namespace detail

template <class Ctx>
SeriesT<Ctx> ps_add(const SeriesT<Ctx>& a, const SeriesT<Ctx>& b) {
  detail::require_same_ctx(a, b);
  std::int64_t n = std::min(a.precision(), b.precision());
  SeriesT<Ctx> r(a.ctx(), n);
  for (std::int64_t k = 0; k <= n; ++k) r.set_coeff(k, a.ctx()->add(a.coeff(k), b.coeff(k)));
  return r;
}

template <class Ctx>
SeriesT<Ctx> ps_sub(const SeriesT<Ctx>& a, const SeriesT<Ctx>& b) {
  detail::require_same_ctx(a, b);
  std::int64_t n = std::min(a.precision(), b.precision());
  SeriesT<Ctx> r(a.ctx(), n);
  for (std::int64_t k = 0; k <= n; ++k) r.set_coeff(k, a.ctx()->sub(a.coeff(k), b.coeff(k)));
  return r;
}

template <class Ctx>
SeriesT<Ctx> ps_scale(const SeriesT<Ctx>& a, const typename Ctx::Elem& s) {
  SeriesT<Ctx> r(a.ctx(), a.precision());
  for (std::int64_t k = 0; k <= a.precision(); ++k) r.set_coeff(k, a.ctx()->mul(a.coeff(k), s));
  return r;
}

// Truncated product.  For F_q the convolution runs on packed int64 lanes
// with lazy reduction; other rings use the generic element ops.
template <class Ctx>
SeriesT<Ctx> ps_mul(const SeriesT<Ctx>& a, const SeriesT<Ctx>& b) {
  detail::require_same_ctx(a, b);
  std::int64_t n = std::min(a.precision(), b.precision());
  SeriesT<Ctx> r(a.ctx(), n);

  if constexpr (std::is_same_v<Ctx, FieldSpec>) {
    const FieldSpec& F = *a.ctx();
    const std::int64_t p = F.p();
    const std::int64_t pm1sq = (p - 1) * (p - 1);
    // lanes hold at most `chunk` unreduced products of two residues
    const std::int64_t chunk =
        std::max<std::int64_t>(1, (std::int64_t(1) << 62) / (2 * pm1sq + 1));
    if (F.m() == 1) {
      for (std::int64_t k = 0; k <= n; ++k) {
        std::int64_t acc = 0, cnt = 0;
        std::int64_t lo = std::max<std::int64_t>(0, k - b.precision());
        for (std::int64_t i = lo; i <= k; ++i) {
          acc += a.coeff(i).c0 * b.coeff(k - i).c0;
          if (++cnt == chunk) {
            acc %= p;
            cnt = 0;
          }
        }
        r.set_coeff(k, {acc % p, 0});
      }
    } else {
      const std::int64_t s0 = p - F.r0(), s1 = p - F.r1();
      for (std::int64_t k = 0; k <= n; ++k) {
        std::int64_t la = 0, lb = 0, lc = 0, cnt = 0;
        std::int64_t lo = std::max<std::int64_t>(0, k - b.precision());
        for (std::int64_t i = lo; i <= k; ++i) {
          const FqCoeff& x = a.coeff(i);
          const FqCoeff& y = b.coeff(k - i);
          la += x.c0 * y.c0;
          lb += x.c0 * y.c1 + x.c1 * y.c0;
          lc += x.c1 * y.c1;
          if (++cnt == chunk) {
            la %= p; lb %= p; lc %= p;
            cnt = 0;
          }
        }
        la %= p; lb %= p; lc %= p;
        r.set_coeff(k, {(la + s0 * lc) % p, (lb + s1 * lc) % p});
      }
    }
    return r;
  } else {
    const Ctx& R = *a.ctx();
    for (std::int64_t k = 0; k <= n; ++k) {
      auto acc = R.zero();
      std::int64_t lo = std::max<std::int64_t>(0, k - b.precision());
      for (std::int64_t i = lo; i <= k; ++i) acc = R.add(acc, R.mul(a.coeff(i), b.coeff(k - i)));
      r.set_coeff(k, acc);
    }
    return r;
  }
}

namespace detail {

template <class Ctx>
void require_composable(const SeriesT<Ctx>& g) {
  if (!g.ctx()->is_zero(g.coeff(0)))
    throw std::invalid_argument("composition requires zero constant term in the inner series");
}

}  // namespace detail

// f(g) mod x^{N+1} by Horner: N series multiplications.  Baseline for the
// cost model and the agreement oracle for the blocked path below.
template <class Ctx>
SeriesT<Ctx> ps_compose_horner(const SeriesT<Ctx>& f, const SeriesT<Ctx>& g) {
  detail::require_same_ctx(f, g);
  detail::require_composable(g);
  std::int64_t n = std::min(f.precision(), g.precision());
  SeriesT<Ctx> gt = g.truncated(n);
  SeriesT<Ctx> acc(f.ctx(), n);
  for (std::int64_t k = std::min(f.precision(), n); k >= 0; --k) {
    acc = ps_mul(acc, gt);
    acc.set_coeff(0, f.ctx()->add(acc.coeff(0), f.coeff(k)));
  }
  return acc;
}

// Default composition: blocked (Paterson-Stockmeyer) with block size
// ~sqrt(N), about 2*sqrt(N) series multiplications instead of N.  Agrees
// with Horner exactly; the test suite pins that on random inputs.
template <class Ctx>
SeriesT<Ctx> ps_compose(const SeriesT<Ctx>& f, const SeriesT<Ctx>& g) {
  detail::require_same_ctx(f, g);
  detail::require_composable(g);
  const Ctx& R = *f.ctx();
  std::int64_t n = std::min(f.precision(), g.precision());
  std::int64_t len = n + 1;
  if (len <= 8) return ps_compose_horner(f.truncated(n), g.truncated(n));

  std::int64_t bs = static_cast<std::int64_t>(std::sqrt(static_cast<double>(len))) + 1;
  SeriesT<Ctx> gt = g.truncated(n);

  std::vector<SeriesT<Ctx>> pow;  // g^1 .. g^bs
  pow.reserve(static_cast<std::size_t>(bs));
  pow.push_back(gt);
  for (std::int64_t i = 1; i < bs; ++i) pow.push_back(ps_mul(pow.back(), gt));

  auto block = [&](std::int64_t j) {
    SeriesT<Ctx> acc(f.ctx(), n);
    std::int64_t base = j * bs;
    if (base <= std::min(f.precision(), n)) acc.set_coeff(0, f.coeff(base));
    for (std::int64_t i = 1; i < bs; ++i) {
      std::int64_t idx = base + i;
      if (idx > std::min(f.precision(), n)) break;
      const auto& fc = f.coeff(idx);
      if (R.is_zero(fc)) continue;
      const auto& gp = pow[static_cast<std::size_t>(i - 1)];
      for (std::int64_t k = 0; k <= n; ++k)
        acc.set_coeff(k, R.add(acc.coeff(k), R.mul(fc, gp.coeff(k))));
    }
    return acc;
  };

  std::int64_t nblocks = (std::min(f.precision(), n) / bs) + 1;
  SeriesT<Ctx> acc = block(nblocks - 1);
  const SeriesT<Ctx>& gbs = pow.back();  // g^bs
  for (std::int64_t j = nblocks - 2; j >= 0; --j) acc = ps_add(ps_mul(acc, gbs), block(j));
  return acc;
}

// Compositional inverse: h with f(h) = h(f) = x, solved degree by degree.
// Requires f(0) = 0 and an invertible linear coefficient.  O(N^3) element
// operations; meant for cross-checks and modest precisions, not the hot path.
template <class Ctx>
SeriesT<Ctx> ps_comp_inverse(const SeriesT<Ctx>& f) {
  const Ctx& R = *f.ctx();
  if (!R.is_zero(f.coeff(0)))
    throw std::invalid_argument("compositional inverse requires zero constant term");
  std::int64_t n = f.precision();
  if (n < 1) throw std::invalid_argument("compositional inverse needs precision >= 1");
  auto f1inv = R.inv(f.coeff(1));  // throws if not a unit

  std::size_t sz = static_cast<std::size_t>(n) + 1;
  // powers[k][d] = coefficient of x^d in h^k, filled as h grows
  std::vector<std::vector<typename Ctx::Elem>> powers(sz + 1,
                                                      std::vector<typename Ctx::Elem>(sz, R.zero()));
  std::vector<typename Ctx::Elem> h(sz, R.zero());
  h[1] = f1inv;
  if (n >= 1) powers[1][1] = h[1];

  for (std::int64_t d = 2; d <= n; ++d) {
    for (std::int64_t k = 2; k <= d; ++k) {
      auto acc = R.zero();
      for (std::int64_t i = 1; i <= d - k + 1; ++i)
        acc = R.add(acc, R.mul(h[static_cast<std::size_t>(i)],
                               powers[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(d - i)]));
      powers[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] = acc;
    }
    auto rhs = R.zero();
    for (std::int64_t k = 2; k <= d; ++k) {
      const auto& fk = f.coeff(k);
      if (R.is_zero(fk)) continue;
      rhs = R.add(rhs, R.mul(fk, powers[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)]));
    }
    h[static_cast<std::size_t>(d)] = R.mul(R.neg(rhs), f1inv);
    powers[1][static_cast<std::size_t>(d)] = h[static_cast<std::size_t>(d)];
  }
  return SeriesT<Ctx>(f.ctx(), std::move(h));
}

// x-adic valuation: smallest k with a nonzero stored coefficient, nullopt
// when every stored coefficient vanishes (true valuation beyond precision
// is indistinguishable from the zero series).
template <class Ctx>
std::optional<std::int64_t> ps_valuation(const SeriesT<Ctx>& f) {
  for (std::int64_t k = 0; k <= f.precision(); ++k)
    if (!f.ctx()->is_zero(f.coeff(k))) return k;
  return std::nullopt;
}

}  // namespace wildram

#endif
