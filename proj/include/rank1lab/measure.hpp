#pragma once

#include "rank1lab/space.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rank1lab {

// Sorted disjoint closed digit intervals.
class DigitSet {
public:
    DigitSet() = default;
    static DigitSet range(long long lo, long long hi);
    static DigitSet of(std::initializer_list<long long> ds);

    bool empty() const { return iv_.empty(); }
    long long size() const;
    bool contains(long long x) const;
    DigitSet intersect(const DigitSet& o) const;
    DigitSet minus(const DigitSet& o) const;
    DigitSet complement(long long c) const;  // within [0, c]
    bool within(long long c) const;
    DigitSet& add(long long lo, long long hi);
    const std::vector<std::pair<long long, long long>>& intervals() const { return iv_; }
    std::vector<long long> digits() const;
    bool operator==(const DigitSet& o) const { return iv_ == o.iv_; }

private:
    std::vector<std::pair<long long, long long>> iv_;
    void normalize();
};

// One product term: scale -> allowed digits (unlisted scales are free).
struct Constraint {
    std::map<int, DigitSet> allowed;

    bool contradictory() const;
    Constraint intersect(const Constraint& o) const;
    Constraint with(int scale, const DigitSet& ds) const;  // intersect one scale
    Membership contains(const Word& w) const;
    int max_scale() const;
    int min_scale() const;
};

class ConstraintSet {
public:
    std::vector<Constraint> terms;
    bool intersect_x = false;

    static ConstraintSet full();
    static ConstraintSet none();
    static ConstraintSet cylinder(const Word& prefix);
    static ConstraintSet digit(int scale, const DigitSet& ds);

    ConstraintSet& add(const Constraint& c);
    ConstraintSet unite(const ConstraintSet& o) const;
    ConstraintSet intersect(const ConstraintSet& o) const;
    ConstraintSet minus(const ConstraintSet& o) const;
    ConstraintSet complement() const;
    ConstraintSet normalized() const;  // pairwise disjoint terms
    ConstraintSet with_x() const {
        ConstraintSet s = *this;
        s.intersect_x = true;
        return s;
    }

    Membership contains(const Word& w) const;
    bool valid(const Schedule& s) const;  // every digit subset inside its alphabet
    int max_scale() const;
    int min_scale() const;
    std::string json() const;
};

struct MeasureInterval {
    Rat lower, upper;
    bool contains(const Rat& v) const { return lower <= v && v <= upper; }
    MeasureInterval operator*(const Rat& f) const { return {lower * f, upper * f}; }
};

class Measure {
public:
    explicit Measure(const Space& sp);

    Rat nu(const ConstraintSet& set) const;
    Rat nu(const Constraint& c) const;
    // nu(set ∩ Y_K), exact
    Rat nu_surviving(const ConstraintSet& set, int K) const;
    Int count_surviving(const Constraint& c, int K) const;  // among length-K words
    // nu(X) as an interval; exact for finite schedules at the horizon
    MeasureInterval nu_X(int K) const;
    MeasureInterval mu_interval(const ConstraintSet& set, int K = -1) const;
    MeasureInterval mu_interval(const Constraint& c, int K = -1) const;

    const Space& space() const { return *sp_; }

private:
    const Space* sp_;
    std::map<int, Word> thresholds_;  // a(n) -> survivor of rank N - Q at length a(n)-1
    Rat tail(int K) const;
};

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct IndependenceReport {
    Verdict verdict = Verdict::Inconclusive;
    MeasureInterval ratio;
    Rat threshold;
};
IndependenceReport verify_independence(const Measure& m, const Constraint& D, const Constraint& C, int k);

// Lemma size bounds for every cylinder of length <= len (exhaustive): counts of violations.
struct CylinderLemmaReport {
    long long cylinders = 0, decay_failures = 0, size_failures = 0;
    Rat xi;
    std::string witness;
};
CylinderLemmaReport verify_cylinder_lemmas(const Measure& m, int len);

struct TowerReport {
    int n = 0;
    long long a = 0;
    Word base;
    Int h;
    bool base_survives = false;
    bool h_below_t = false;
    long long sampled = 0, excluded_bad = 0, level_checks = 0, level_mismatches = 0;
    MeasureInterval base_mu;      // mu of the base cylinder, exact
    MeasureInterval cover;        // union of levels; Bad share bracketed by a Wilson interval
};
TowerReport rank_one_tower(const Measure& m, int n, long long samples, Rng& rng);

// Words whose length-k prefix has value in [lo, hi], as disjoint product terms.
ConstraintSet value_window(const Space& sp, int k, const Int& lo, const Int& hi);
// Same for surviving prefixes with rank in [lo, hi] (empty set when lo > hi).
ConstraintSet rank_window(const Space& sp, int k, const Int& lo, const Int& hi);
// mu-distributed point of set ∩ X: nu-proposal inside the set, rejection on X.
Word sample_in(const Measure& m, const ConstraintSet& set, Rng& rng, long long* rejected = nullptr);

struct Wilson {
    double lo, hi;
};
Wilson wilson(long long hits, long long n, double z = 3.29);

// fraction of mu-sampled x with k_x(p(n)) = t(n-1), i.e. T^p(n) x = S^t(n-1) x
struct RigidityReport {
    int n = 0;
    Int r, target;
    long long samples = 0, hits = 0, rejected = 0;
    double fraction = 0;
    Wilson ci{0, 0};
};
RigidityReport partial_rigidity(const Space& sp, int n, long long samples, Rng& rng);

// A(k) = {x(k) = 1} \ Bad(k, p(k)) returns near x under T^p(k); B(k) = {x(k) = 8, x(k-1) < 7} \ Bad near T x.
// NotBoundedScale unless k and k-1 are both bounded.
struct WeakMixReport {
    int k = 0;
    long long a_tested = 0, a_far = 0, b_tested = 0, b_far = 0, excluded_bad = 0;
    MeasureInterval mu_A_cyl, mu_B_cyl;  // before removing Bad
    bool ok() const { return a_far == 0 && b_far == 0; }
};
WeakMixReport weak_mixing_sets(const Measure& m, int k, long long samples, Rng& rng);

}  // namespace rank1lab
