#include "doctest.h"
#include "oracle.hpp"
#include "rank1lab/errors.hpp"
#include "rank1lab/measure.hpp"

using namespace rank1lab;

namespace {
struct Fixture {
    Schedule s;
    Tables tb;
    Space sp;
    Measure m;
    explicit Fixture(const std::string& name)
        : s(Schedule::preset(name)), tb(compute_tables(s)), sp(s, tb), m(sp) {}
};

Constraint random_constraint(Rng& rng, const Schedule& s) {
    Constraint c;
    for (int k = 1; k <= s.K(); ++k) {
        if (rng.below(3) != 0) continue;
        long long cc = s.c(k);
        long long lo = rng.below(cc + 1), hi = lo + rng.below(cc + 1 - lo);
        c.allowed[k] = DigitSet::range(lo, hi);
    }
    return c;
}
}  // namespace

TEST_CASE("digit sets") {
    DigitSet a = DigitSet::range(2, 9);
    DigitSet b = DigitSet::of({0, 5, 6, 12});
    CHECK(a.intersect(b).digits() == std::vector<long long>{5, 6});
    CHECK(a.minus(b).size() == 6);
    CHECK(b.complement(12).size() == 9);
    CHECK(DigitSet::range(3, 2).empty());
}

TEST_CASE("nu of named sets") {
    Fixture f("mini");
    CHECK(f.m.nu(ConstraintSet::full()) == 1);
    Word w77(std::vector<long long>{7, 8});
    CHECK(f.m.nu(ConstraintSet::cylinder(w77)) == Rat(1, f.tb.t[2]));
    // W_(a(n)) as a union of cylinders
    for (int n = 1; n <= 2; ++n) {
        int a = static_cast<int>(f.s.a(n));
        Rat sum = 0;
        for (Int v = 0; v < f.tb.t[a]; ++v)
            if (f.sp.in_W(f.sp.from_value(v, a), a) == Membership::In) sum += Rat(1, f.tb.t[a]);
        CHECK(sum == Rat((f.s.d(n) + 1) * f.tb.Q(n), f.tb.t[a]));
    }
}

TEST_CASE("surviving counts reproduce the height tables") {
    for (const char* name : {"mini", "sweep", "lab", "desk"}) {
        Fixture f(name);
        for (int K = 1; K <= f.tb.K; ++K) CHECK(f.m.count_surviving(Constraint{}, K) == f.tb.N(K));
    }
    Schedule p = Schedule::paper(300);
    Tables tp = compute_tables(p);
    Space sp(p, tp);
    Measure m(sp);
    CHECK(m.count_surviving(Constraint{}, 300) == tp.N(300));
}

TEST_CASE("exact measure against enumeration") {
    Fixture f("mini");
    oracle::Enum e(f.s);
    Rng rng(3, 4);
    for (int i = 0; i < 60; ++i) {
        ConstraintSet cs;
        int nt = 1 + static_cast<int>(rng.below(3));
        for (int j = 0; j < nt; ++j) cs.add(random_constraint(rng, f.s));
        int64_t hit = 0, alive = 0;
        for (int64_t v = 0; v < e.t[5]; ++v) {
            if (!e.alive[5][v]) continue;
            ++alive;
            if (cs.contains(e.word(v, 5)) == Membership::In) ++hit;
        }
        MeasureInterval mi = f.m.mu_interval(cs);
        CHECK(mi.contains(Rat(hit, alive)));
        CHECK(mi.lower == mi.upper);
        // additivity and complement
        CHECK(f.m.nu(cs) + f.m.nu(cs.complement()) == 1);
        CHECK(f.m.nu_surviving(cs, 5) + f.m.nu_surviving(cs.complement(), 5) == Rat(f.tb.N(5), f.tb.t[5]));
    }
}

TEST_CASE("truncated intervals shrink and bracket") {
    Fixture f("lab");
    ConstraintSet c = ConstraintSet::digit(1, DigitSet::of({0}));
    MeasureInterval exact = f.m.mu_interval(c);
    Rat prev_w = 2;
    for (int K : {8, 13, 20, 28}) {
        MeasureInterval mi = f.m.mu_interval(c, K);
        CHECK(mi.lower <= exact.lower);
        CHECK(exact.upper <= mi.upper);
        CHECK(mi.upper - mi.lower <= prev_w);
        prev_w = mi.upper - mi.lower;
    }
    Schedule p = Schedule::paper(300);
    Tables tp = compute_tables(p);
    Space sp(p, tp);
    Measure m(sp);
    MeasureInterval x = m.mu_interval(ConstraintSet::full());
    CHECK(x.lower <= 1);
    CHECK(x.upper == 1);
}

TEST_CASE("independence") {
    Fixture f("desk");
    Constraint D, C;
    D.allowed[1] = DigitSet::of({0});
    C.allowed[4] = DigitSet::of({0});
    CHECK(verify_independence(f.m, D, C, 3).verdict == Verdict::Pass);
    CHECK(verify_independence(f.m, Constraint{}, C, 3).verdict == Verdict::Pass);
    Constraint C2;
    C2.allowed[1] = DigitSet::of({0, 1});
    CHECK_THROWS_AS(verify_independence(f.m, D, C2, 1), PreconditionViolated);
}

TEST_CASE("cylinder decay and size: top-row counterexample is reported") {
    Fixture f("mini");
    CylinderLemmaReport r = verify_cylinder_lemmas(f.m, 3);
    CHECK(r.cylinders > 1000);
    // [9^(a(1)-1)] keeps only half of its mass past W_(a(1)); the stated bounds miss it
    CHECK(r.decay_failures > 0);
    CHECK(r.witness == "size at 9,9");
    Rat lost = Rat(1, f.tb.t[2]) - f.m.nu_surviving(ConstraintSet::cylinder(Word({9, 9})), 5);
    CHECK(lost >= Rat(1, 2 * f.tb.t[2]));
}

TEST_CASE("rank-one tower") {
    Fixture f("lab");
    Rng rng(5, 5);
    Rat prev = 0;
    for (int n = 1; n <= 3; ++n) {
        TowerReport t = rank_one_tower(f.m, n, 200, rng);
        REQUIRE(t.base_survives);
        CHECK(t.h_below_t);
        CHECK(t.level_mismatches == 0);
        CHECK(t.cover.lower <= t.cover.upper);
        CHECK(t.cover.upper >= prev);
        prev = t.cover.lower;
    }
}
