#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace rank1lab {

using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

inline std::string str(const Int& v) { return v.str(); }
std::string str(const Rat& v);

// Decimal rendering of a rational with `digits` significant digits (reporting only).
std::string approx(const Rat& v, int digits = 6);
double to_double(const Rat& v);

Int parse_int(const std::string& s);
Int pow10(unsigned long e);

inline Int iabs(const Int& v) { return v < 0 ? Int(-v) : v; }
inline int sgn(const Int& v) { return v < 0 ? -1 : (v > 0 ? 1 : 0); }

// floor division / non-negative modulus
Int floor_div(const Int& a, const Int& b);
Int floor_mod(const Int& a, const Int& b);

}  // namespace rank1lab
