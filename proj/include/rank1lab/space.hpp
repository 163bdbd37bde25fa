#pragma once

#include "rank1lab/rng.hpp"
#include "rank1lab/schedule.hpp"

#include <string>
#include <vector>

namespace rank1lab {

enum class Membership { In, Out, Unknown };
const char* to_string(Membership m);

struct Word {
    std::vector<long long> x;  // x[0] is the digit x(1)
    bool tail_known = true;

    Word() = default;
    explicit Word(std::vector<long long> d) : x(std::move(d)) {}
    int L() const { return static_cast<int>(x.size()); }
    long long operator()(int i) const { return x.at(i - 1); }
    long long& at(int i) { return x.at(i - 1); }
    Word prefix(int k) const;
    std::string str() const;  // comma separated
    static Word parse(const std::string& s);
    bool operator==(const Word& o) const { return x == o.x; }
};

// x =^k y; PrefixTooShort when either word is shorter than k
bool agree(const Word& x, const Word& y, int k);
// d(x,y) = 2^-j, j the first disagreement; returns j or 0 when the shared prefix is identical
int first_difference(const Word& x, const Word& y);

struct Orbit {
    Word y;
    Int stime;  // S-time expended (k_x(n) for T)
};

class Space {
public:
    Space(const Schedule& s, const Tables& tb);

    const Schedule& schedule() const { return *s_; }
    const Tables& tables() const { return *tb_; }
    int K() const { return tb_->K; }

    // mixed-radix value of x(1..k) and its inverse
    Int value(const Word& w, int k) const;
    Word from_value(const Int& v, int k) const;

    // number of surviving length-k words of smaller value
    Int below(const Word& w, int k) const;
    // position in the S|Y_k cycle counted from the base [0^k]
    Int rank(const Word& w, int k) const;
    Word unrank(const Int& rho, int k) const;

    // smallest j <= k with x|j in W_j, 0 if x|k survives
    int first_removed(const Word& w, int k) const;
    bool survives(const Word& w, int k) const { return first_removed(w, k) == 0; }

    Membership in_W(const Word& w, int k) const;
    Membership in_Y(const Word& w, int k) const;
    Membership in_X(const Word& w) const;
    Membership in_bad(const Word& w, int b, const Int& r) const;

    // number of words of W_k with value below v (v in [0, t(k)))
    Int removed_below(const Int& v, int k) const;
    // #{u in [lo, hi] : S^u x in W_k}; needs x.L >= k
    Int visits(const Word& w, int k, const Int& lo, const Int& hi) const;

    Word odometer_add(const Word& w, const Int& m) const;

    // (S|Y_b)^r; b <= K, x|b must survive
    Orbit induced(const Word& w, int b, const Int& r) const;
    Int stime(const Word& w, int b, const Int& r) const { return induced(w, b, r).stime; }
    // T^r; InsufficientPrecision unless X membership is decided
    Orbit T(const Word& w, const Int& r) const;
    // cross-checks for induced(): count-and-search, and one step at a time
    Orbit induced_search(const Word& w, int b, const Int& r) const;
    Orbit induced_steps(const Word& w, int b, long long r) const;

    // mu-random point of X (nu-uniform digits to depth K, rejection)
    Word sample_X(Rng& rng, long long* rejected = nullptr) const;
    Word sample_cylinder(Rng& rng, const Word& fixed_prefix) const;

private:
    const Schedule* s_;
    const Tables* tb_;
    std::vector<Int> r7_;  // rank of 7^j among surviving length-j words
    void need(const Word& w, int k) const;
};

}  // namespace rank1lab
