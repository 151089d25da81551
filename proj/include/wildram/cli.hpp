#ifndef WILDRAM_CLI_HPP
#define WILDRAM_CLI_HPP

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wildram/lubin_tate.hpp"
#include "wildram/ramification.hpp"
#include "wildram/series_io.hpp"

namespace wildram::cli {

// Stable exit codes; scripts depend on them.
namespace exit_code {
constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kPrecisionExhausted = 3;
constexpr int kCertificateFailed = 4;
constexpr int kHypothesisFlagged = 5;
}  // namespace exit_code

enum class OutputFormat { Table, Records };

struct RunConfig {
  std::vector<std::string> inputs;  // series files (breaks/sen: 1, classify2: 2)
  std::string output;               // lubin-tate: series file to write
  std::string kind = "ramified";    // lubin-tate: qp | unramified | ramified
  std::string alpha;                // lubin-tate: unit coordinates "a" or "a,b"
  std::string values;               // sen: direct break list
  std::string breaks_list;          // phi: lower breaks
  std::string indices_list;         // phi: index after each break
  std::string eval_at, psi_at;      // phi: evaluation points (rationals)
  std::int64_t p = 3;
  int m = 1;                        // accepted for symmetry; file headers fix the field
  std::int64_t precision = 64;
  std::int64_t pdigits = 24;
  std::int64_t n_max = 2;
  std::int64_t bound = 30;
  std::int64_t level = 2;
  std::int64_t horizon = -1;        // phi: defaults to the last break
  std::int64_t window_start = 1;
  std::uint64_t seed = 12345;       // reserved for sampled suites; outputs are deterministic
  OutputFormat format = OutputFormat::Records;
};

namespace detail {

inline std::string join_values(const std::vector<std::int64_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

inline std::vector<BigInt> parse_bigint_list(const std::string& s) {
  std::vector<BigInt> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    if (cur.empty()) throw std::invalid_argument("empty entry in list '" + s + "'");
    out.emplace_back(cur);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

inline void print_sequence(std::ostream& os, const RunConfig& cfg, const std::string& label,
                           const BreakSequence& seq) {
  if (cfg.format == OutputFormat::Records) {
    os << "element label=" << label << ' ' << seq.record() << '\n';
  } else {
    os << label << ": i_n = [" << join_values(seq.values) << "] (certified to n="
       << seq.certified_to << " at precision " << seq.precision_used << ")\n";
  }
}

inline void print_rank1(std::ostream& os, const RunConfig& cfg, const BreakSequence& seq) {
  if (seq.size() >= 2) {
    SenReport sen = check_sen_congruence(seq);
    if (cfg.format == OutputFormat::Records) {
      os << "sen status=" << (sen.pass ? "pass" : "fail") << " pairs=" << sen.pairs_checked;
      if (sen.first_violation)
        os << " violation_n=" << sen.first_violation->n << " modulus=" << sen.first_violation->modulus
           << " residue=" << sen.first_violation->residue;
      os << '\n';
    } else {
      os << "p-power congruence: " << (sen.pass ? "pass" : "FAIL") << " (" << sen.pairs_checked
         << " pairs)\n";
    }
    for (const auto& w : height_profile(seq)) {
      if (cfg.format == OutputFormat::Records)
        os << "height n=" << w.n << " ratio=" << to_string(w.ratio) << " log_p=" << w.log_p << '\n';
      else
        os << "  i_" << w.n << "/i_" << w.n - 1 << " = " << to_string(w.ratio)
           << "  (log_p ~ " << w.log_p << ")\n";
    }
  }
  if (seq.size() >= 3) {
    Rank1Classification cls = classify_zp(seq, cfg.window_start);
    if (cfg.format == OutputFormat::Records) {
      os << "class1 result=" << to_string(cls.result) << " window_start=" << cls.window_start;
      if (!cls.growth.empty())
        os << " growth_witness_n=" << cls.growth.front().n
           << " growth_bound=" << cls.growth.front().bound_factor;
      os << '\n';
    } else {
      os << "rank-1 classification: " << to_string(cls.result) << '\n';
    }
    if (cls.result == CharClass::Char0) {
      Rank1RamIndex e = ram_index_zp(seq, cfg.window_start);
      if (cfg.format == OutputFormat::Records)
        os << "ram1 e=" << to_string(e.e) << " consistent=" << (e.consistent ? 1 : 0) << '\n';
      else
        os << "absolute ramification index e = " << to_string(e.e)
           << (e.consistent ? "" : " (inconsistent across windows!)") << '\n';
    }
  }
}

}  // namespace detail

// breaks: break sequence, congruence check, height profile, rank-1
// classification and (when Char0) the ramification index of one series file.
inline int run_breaks(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 1) {
    err << "breaks: need exactly one input series file\n";
    return exit_code::kBadInput;
  }
  std::optional<BreakSequence> seq;
  try {
    Automorphism sigma(read_series_file(cfg.inputs[0]));
    seq = compute_breaks(sigma, cfg.n_max);
  } catch (const std::exception& e) {
    err << "breaks: " << e.what() << '\n';
    return exit_code::kBadInput;
  }
  if (seq->size() == 0) {
    err << "breaks: identity automorphism (no break visible at this precision)\n";
    return exit_code::kPrecisionExhausted;
  }
  detail::print_sequence(out, cfg, "sigma", *seq);
  detail::print_rank1(out, cfg, *seq);
  if (seq->size() < cfg.n_max + 1) {
    err << "breaks: precision exhausted after n=" << seq->certified_to << " (requested n_max="
        << cfg.n_max << ")\n";
    return exit_code::kPrecisionExhausted;
  }
  return exit_code::kOk;
}

// lubin-tate: construct [alpha](x) over the chosen base ring, reduce it to a
// wild automorphism, write the series file, report certificate and breaks.
inline int run_lubin_tate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.output.empty()) {
    err << "lubin-tate: need an output path\n";
    return exit_code::kBadInput;
  }
  try {
    RingKind kind = parse_ring_kind(cfg.kind);
    auto ring = make_base_ring(kind, cfg.p, cfg.pdigits);
    auto coords = detail::parse_bigint_list(cfg.alpha);
    if (coords.size() == 1) coords.push_back(0);
    if (coords.size() != 2) throw std::invalid_argument("alpha needs one or two coordinates");
    RingElem alpha(ring, coords[0], coords[1]);
    LTContext ctx(ring, cfg.precision);

    LTEndomorphism endo = lt_endomorphism(ctx, alpha);
    Automorphism sigma = lt_reduce(endo.series);

    std::ostringstream prov;
    prov << "wildram lubin-tate kind=" << cfg.kind << " p=" << cfg.p
         << " pdigits=" << endo.pdigits_used << " alpha=" << alpha.str() << " N=" << cfg.precision;
    write_series_file(cfg.output, sigma.series(), prov.str());

    if (cfg.format == OutputFormat::Records) {
      out << "ltcert kind=" << cfg.kind << " p=" << cfg.p << " alpha=" << alpha.str()
          << " pdigits=" << endo.pdigits_used << " attempts=" << endo.attempts
          << " error_bound=" << endo.error_bound << " loss=" << endo.measured_loss
          << " cap=" << endo.valuation_cap << " required=" << endo.required_valuation
          << " file=" << cfg.output << '\n';
    } else {
      out << "[" << alpha.str() << "](x) over " << cfg.kind << " p=" << cfg.p
          << ": certified accuracy " << endo.error_bound << "/" << endo.valuation_cap
          << " (loss " << endo.measured_loss << ", required " << endo.required_valuation << ", "
          << endo.attempts << " attempt(s)), written to " << cfg.output << '\n';
    }

    BreakSequence seq = compute_breaks(sigma, cfg.n_max);
    if (seq.size() == 0) {
      out << (cfg.format == OutputFormat::Records
                  ? "warning degenerate=1 note=reduction-is-identity\n"
                  : "warning: reduction is the identity (alpha = 1 mod the maximal ideal to this depth)\n");
      return exit_code::kOk;
    }
    detail::print_sequence(out, cfg, "sigma_alpha", seq);
    return exit_code::kOk;
  } catch (const CertificateFailure& e) {
    err << "lubin-tate: " << e.what() << '\n';
    return exit_code::kCertificateFailed;
  } catch (const std::exception& e) {
    err << "lubin-tate: " << e.what() << '\n';
    return exit_code::kBadInput;
  }
}

// classify2: full rank-2 report for a generator pair: sequences, depth
// pattern, gamma estimates, characteristic classification, joint filtration
// with certificate, and the ramification index with its hypothesis flag.
inline int run_classify2(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.inputs.size() != 2) {
    err << "classify2: need exactly two input series files\n";
    return exit_code::kBadInput;
  }
  std::optional<Automorphism> sigma, tau;
  try {
    sigma = Automorphism(read_series_file(cfg.inputs[0]));
    tau = Automorphism(read_series_file(cfg.inputs[1]));
    if (!sigma->spec()->same(*tau->spec()))
      throw std::invalid_argument("generator files use different field headers");
  } catch (const std::exception& e) {
    err << "classify2: " << e.what() << '\n';
    return exit_code::kBadInput;
  }

  std::int64_t precision = std::min(sigma->precision(), tau->precision());
  if (precision < cfg.bound + 2) {
    err << "classify2: precision " << precision << " is below bound+2 = " << cfg.bound + 2 << '\n';
    return exit_code::kPrecisionExhausted;
  }

  ProfileOptions popt;
  popt.n_max = cfg.n_max;
  RankTwoProfile prof = build_rank2_profile(*sigma, *tau, popt);
  detail::print_sequence(out, cfg, "sigma", prof.seq_sigma);
  detail::print_sequence(out, cfg, "tau", prof.seq_tau);
  for (const auto& c : prof.combos) {
    std::ostringstream label;
    label << "sigma^" << c.a << "tau^" << c.b;
    detail::print_sequence(out, cfg, label.str(), c.seq);
  }
  if (prof.seq_sigma.size() < 3 || prof.seq_tau.size() < 3) {
    err << "classify2: generators need three certified breaks (raise precision)\n";
    return exit_code::kPrecisionExhausted;
  }

  if (cfg.format == OutputFormat::Records) {
    out << "depth pattern=" << to_string(prof.depth.pattern) << " n=" << prof.depth.n
        << " m=" << prof.depth.m << " sigma_leads=" << (prof.depth.sigma_leads ? 1 : 0);
    if (!prof.depth.note.empty()) out << " note=\"" << prof.depth.note << "\"";
    out << '\n';
    out << "gamma label=sigma value=" << to_string(prof.gamma_sigma.value)
        << " stable=" << (prof.gamma_sigma.stable ? 1 : 0) << '\n';
    out << "gamma label=tau value=" << to_string(prof.gamma_tau.value)
        << " stable=" << (prof.gamma_tau.stable ? 1 : 0) << '\n';
  } else {
    out << "depth pattern: " << to_string(prof.depth.pattern) << " (alignment n=" << prof.depth.n
        << ", m=" << prof.depth.m << ")\n";
    out << "gamma(sigma) = " << to_string(prof.gamma_sigma.value)
        << (prof.gamma_sigma.stable ? "" : " [unstable]") << ", gamma(tau) = "
        << to_string(prof.gamma_tau.value) << (prof.gamma_tau.stable ? "" : " [unstable]") << '\n';
  }

  Rank2Classification cls = classify_zp2(prof, cfg.window_start);
  if (cfg.format == OutputFormat::Records)
    out << "class2 result=" << to_string(cls.result) << " tested=" << cls.tested_count
        << " skipped=" << cls.skipped_count << " window_start=" << cls.window_start << '\n';
  else
    out << "rank-2 classification: " << to_string(cls.result) << " (" << cls.tested_count
        << " elements tested, " << cls.skipped_count << " with too few certified breaks)\n";

  JointFiltrationOptions jopt;
  jopt.level = cfg.level;
  JointFiltration jf = joint_filtration(*sigma, *tau, cfg.bound, jopt);
  if (cfg.format == OutputFormat::Records)
    out << jf.record() << '\n';
  else {
    out << "joint filtration (level " << jf.level << ", bound " << jf.bound << "): ";
    for (const auto& lv : jf.table.levels)
      out << '[' << lv.brk << " -> index " << lv.index_after << "] ";
    out << (jf.certificate_ok ? "certificate pass" : "CERTIFICATE FAIL")
        << (jf.shape_product_form ? "" : ", stabilizers not in product form") << '\n';
  }
  if (!jf.note.empty()) out << (cfg.format == OutputFormat::Records ? "note " : "note: ") << jf.note
                            << '\n';

  bool hypothesis_flag = false;
  if (cls.result == CharClass::Char0) {
    Rank2RamIndex ram = ram_index_zp2(prof, &jf, cfg.window_start);
    hypothesis_flag = ram.hypothesis_flag;
    if (cfg.format == OutputFormat::Records) {
      out << "rami status=" << to_string(ram.status) << " branch=" << to_string(ram.branch)
          << " log_ratio=" << ram.log_ratio << " a=" << ram.a << " gamma1=" << to_string(ram.gamma1)
          << " gamma2=" << to_string(ram.gamma2) << " e=" << to_string(ram.e)
          << " remark_ok=" << (ram.remark_identity_ok ? 1 : 0)
          << " hypothesis_flag=" << (ram.hypothesis_flag ? 1 : 0);
      if (!ram.note.empty()) out << " note=\"" << ram.note << "\"";
      out << '\n';
    } else {
      out << "ramification index (" << to_string(ram.branch) << " branch, a=" << ram.a
          << "): e = " << to_string(ram.e);
      if (ram.hypothesis_flag)
        out << "  ** hypothesis flag: stabilizers are not <sigma^{p^n}, tau^{p^m}>;"
               " the closed formula is unreliable here **";
      out << '\n';
    }
  }

  if (!jf.certificate_ok) {
    err << "classify2: joint filtration certificate failed"
        << (jf.note.empty() ? "" : " (" + jf.note + ")") << '\n';
    return exit_code::kCertificateFailed;
  }
  if (hypothesis_flag) return exit_code::kHypothesisFlagged;
  return exit_code::kOk;
}

// phi: exact Hasse-Herbrand function from a break/index table, with optional
// evaluations; knot lists are meant for plotting and further tooling.
inline int run_phi(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    auto breaks = detail::parse_bigint_list(cfg.breaks_list);
    auto indices = detail::parse_bigint_list(cfg.indices_list);
    if (breaks.size() != indices.size())
      throw std::invalid_argument("breaks and indices must have the same length");
    FiltrationTable t;
    t.p = cfg.p;
    t.rank = 1;
    BigInt prev = 1;
    for (std::size_t i = 0; i < breaks.size(); ++i) {
      if (prev * cfg.p * cfg.p == indices[i]) t.rank = 2;  // a p^2 jump marks a rank-2 table
      t.levels.push_back({breaks[i].convert_to<std::int64_t>(), indices[i]});
      prev = indices[i];
    }
    Rational horizon = cfg.horizon >= 0 ? Rational(cfg.horizon)
                                        : Rational(t.levels.empty() ? 0 : t.levels.back().brk);
    PiecewiseLinearFn phi = phi_function(t, horizon);
    out << phi.record("phi") << '\n';
    out << phi.inverse().record("psi") << '\n';
    if (!cfg.eval_at.empty()) {
      Rational r = parse_rational(cfg.eval_at);
      out << "phi_eval x=" << to_string(r) << " value=" << to_string(phi.eval(r)) << '\n';
    }
    if (!cfg.psi_at.empty()) {
      Rational r = parse_rational(cfg.psi_at);
      out << "psi_eval x=" << to_string(r) << " value=" << to_string(psi_eval(phi, r)) << '\n';
    }
    return exit_code::kOk;
  } catch (const std::exception& e) {
    err << "phi: " << e.what() << '\n';
    return exit_code::kBadInput;
  }
}

// sen: congruence check of a break sequence, from a series file or given
// directly as --values.
inline int run_sen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    BreakSequence seq;
    if (!cfg.values.empty()) {
      std::vector<std::int64_t> vals;
      for (const auto& v : detail::parse_bigint_list(cfg.values))
        vals.push_back(v.convert_to<std::int64_t>());
      seq = BreakSequence(cfg.p, std::move(vals), 0);
    } else {
      if (cfg.inputs.size() != 1)
        throw std::invalid_argument("need --values or exactly one input series file");
      Automorphism sigma(read_series_file(cfg.inputs[0]));
      seq = compute_breaks(sigma, cfg.n_max);
    }
    detail::print_sequence(out, cfg, "sigma", seq);
    SenReport rep = check_sen_congruence(seq);
    if (cfg.format == OutputFormat::Records) {
      out << "sen status=" << (rep.pass ? "pass" : "fail") << " pairs=" << rep.pairs_checked;
      if (rep.first_violation)
        out << " violation_n=" << rep.first_violation->n
            << " modulus=" << rep.first_violation->modulus
            << " residue=" << rep.first_violation->residue;
      out << '\n';
    } else {
      out << "p-power congruence: " << (rep.pass ? "pass" : "FAIL") << '\n';
    }
    return exit_code::kOk;
  } catch (const std::exception& e) {
    err << "sen: " << e.what() << '\n';
    return exit_code::kBadInput;
  }
}

}  // namespace wildram::cli

#endif
