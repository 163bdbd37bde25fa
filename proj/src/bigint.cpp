#include "rank1lab/bigint.hpp"

#include <cmath>
#include <sstream>

namespace rank1lab {

std::string str(const Rat& v) {
    return boost::multiprecision::numerator(v).str() + "/" +
           boost::multiprecision::denominator(v).str();
}

double to_double(const Rat& v) { return v.convert_to<double>(); }

std::string approx(const Rat& v, int digits) {
    boost::multiprecision::mpf_float_100 f(v);
    std::ostringstream os;
    os.precision(digits);
    os << f;
    return os.str();
}

Int parse_int(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty integer");
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("bad integer: " + s);
    for (size_t k = i; k < s.size(); ++k)
        if (s[k] < '0' || s[k] > '9') throw std::invalid_argument("bad integer: " + s);
    return Int(s);
}

Int pow10(unsigned long e) {
    Int r;
    mpz_ui_pow_ui(r.backend().data(), 10, e);
    return r;
}

Int floor_div(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.backend().data(), a.backend().data(), b.backend().data());
    return q;
}

Int floor_mod(const Int& a, const Int& b) {
    Int r;
    mpz_fdiv_r(r.backend().data(), a.backend().data(), b.backend().data());
    if (r < 0) r += b;
    return r;
}

}  // namespace rank1lab
