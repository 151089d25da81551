#ifndef WILDRAM_SERIES_IO_HPP
#define WILDRAM_SERIES_IO_HPP

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wildram/power_series.hpp"

namespace wildram {

// Series file format (text):
//   line 1: field header, e.g. "p=3;m=2;mod=1,0,1"
//   line 2: "N=<precision>"
//   then one coefficient per line in element form ("a" or "a,b"), x^0 upward.
// Lines starting with '#' are ignored; writers may prepend provenance
// comments.  Files without comments round-trip byte-exactly.

inline void write_series(std::ostream& os, const Series& s,
                         const std::string& provenance = "") {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  os << s.ctx()->header() << '\n';
  os << "N=" << s.precision() << '\n';
  for (std::int64_t k = 0; k <= s.precision(); ++k) os << s.ctx()->format(s.coeff(k)) << '\n';
}

inline std::string series_to_string(const Series& s) {
  std::ostringstream os;
  write_series(os, s);
  return os.str();
}

inline Series read_series(std::istream& is) {
  auto next_line = [&is](std::string& out) {
    while (std::getline(is, out)) {
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (out.empty() || out[0] == '#') continue;
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) throw std::invalid_argument("series file: missing field header");
  auto spec = make_spec(FieldSpec::parse_header(line));

  if (!next_line(line) || line.rfind("N=", 0) != 0)
    throw std::invalid_argument("series file: missing precision line");
  std::int64_t n = std::stoll(line.substr(2));
  if (n < 0) throw std::invalid_argument("series file: negative precision");

  std::vector<FqCoeff> coeffs;
  coeffs.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    if (!next_line(line))
      throw std::invalid_argument("series file: expected " + std::to_string(n + 1) +
                                  " coefficients, got " + std::to_string(k));
    coeffs.push_back(spec->parse(line));
  }
  return Series(spec, std::move(coeffs));
}

inline Series read_series_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open series file '" + path + "'");
  return read_series(f);
}

inline void write_series_file(const std::string& path, const Series& s,
                              const std::string& provenance = "") {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot open '" + path + "' for writing");
  write_series(f, s, provenance);
}

}  // namespace wildram

#endif
