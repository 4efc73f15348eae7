#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "tailatlas/errors.hpp"

namespace tailatlas {

// All set-level and measure-level computations run in exact rationals;
// floating point is reserved for convergence certificates and the billiard.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Rat make_rat(long long num, long long den = 1) {
  return Rat(Int(num), Int(den));
}

/// Parses "p/q" or a bare integer "p". Whitespace is not tolerated: these
/// strings come from config files where sloppiness usually means a typo.
inline Rat parse_rational(const std::string& s, const std::string& where) {
  auto bad = [&](const std::string& why) -> Error {
    return Error(ErrorKind::InvalidInput,
                 "bad rational '" + s + "' at " + where + " (" + why + ")");
  };
  if (s.empty()) throw bad("empty");
  auto is_int = [](const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (!is_int(s)) throw bad("not an integer");
    return Rat(Int(s));
  }
  std::string num = s.substr(0, slash);
  std::string den = s.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) throw bad("not p/q with integer p, q");
  Int d(den);
  if (d == 0) throw bad("zero denominator");
  return Rat(Int(num), d);
}

inline std::string format_rational(const Rat& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

}  // namespace tailatlas
