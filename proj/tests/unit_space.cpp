#include "doctest.h"
#include "oracle.hpp"
#include "rank1lab/errors.hpp"
#include "rank1lab/space.hpp"

using namespace rank1lab;

namespace {
struct Mini {
    Schedule s = Schedule::preset("mini");
    Tables tb = compute_tables(s);
    Space sp{s, tb};
};
}  // namespace

TEST_CASE("odometer basics") {
    Mini m;
    Word z(std::vector<long long>(5, 0));
    Word one = m.sp.odometer_add(z, Int(1));
    CHECK(one.str() == "1,0,0,0,0");
    CHECK(one.tail_known);
    Word top(std::vector<long long>{9, 9, 17, 9, 33});
    Word wrap = m.sp.odometer_add(top, Int(1));
    CHECK(wrap.str() == "0,0,0,0,0");
    CHECK_FALSE(wrap.tail_known);
    Word x(std::vector<long long>{3, 1, 4, 1, 5});
    Word same = m.sp.odometer_add(x, m.tb.t[5]);
    CHECK(same == x);
    CHECK_FALSE(same.tail_known);
    Word back = m.sp.odometer_add(m.sp.odometer_add(x, Int(12345)), Int(-12345));
    CHECK(back == x);
}

TEST_CASE("membership of named cylinders") {
    Mini m;
    CHECK(m.sp.in_W(Word({7, 7, 8}), 3) == Membership::Out);  // 3 is unbounded in mini
    CHECK(m.sp.in_W(Word({7, 8}), 2) == Membership::In);
    CHECK(m.sp.in_W(Word({7, 7, 7, 8}), 4) == Membership::In);
    CHECK(m.sp.in_W(Word({8}), 1) == Membership::In);
    CHECK(m.sp.in_X(Word(std::vector<long long>(5, 0))) == Membership::In);
    CHECK(m.sp.in_X(Word({0, 0})) == Membership::Unknown);
    CHECK(m.sp.in_X(Word({8, 0})) == Membership::Out);
    // [9^(a(1)-1), d(1)+1]
    CHECK(m.sp.in_W(Word({9, 9, 9}), 3) == Membership::In);
    CHECK(m.sp.in_W(Word({9, 9, 8}), 3) == Membership::Out);
    CHECK(m.sp.rank(Word({0, 0, 0}), 3) == 0);
    CHECK(m.sp.rank(Word({1, 0, 0}), 3) == 1);
    CHECK_THROWS_AS(m.sp.rank(Word({8, 0, 0}), 3), RemovedCylinder);
}

TEST_CASE("ranks, survival and heights against the brute-force cycle") {
    Mini m;
    oracle::Enum e(m.s);
    for (int k = 1; k <= m.s.K(); ++k) {
        CHECK(e.p[k] == m.tb.p[k]);
        CHECK(e.count(k) == m.tb.N(k));
        for (int64_t v = 0; v < e.t[k]; v += (k == 5 ? 7 : 1)) {
            Word w = e.word(v, k);
            bool alive = e.alive[k][v];
            REQUIRE(m.sp.survives(w, k) == alive);
            if (alive) {
                REQUIRE(m.sp.rank(w, k) == e.rank[k][v]);
                REQUIRE(m.sp.unrank(Int(e.rank[k][v]), k) == w);
            }
        }
    }
}

TEST_CASE("fast, searched and stepped T powers agree") {
    Mini m;
    oracle::Enum e(m.s);
    Rng rng(7, 1);
    for (int i = 0; i < 200; ++i) {
        Word x = m.sp.sample_X(rng);
        long long r = static_cast<long long>(rng.below(4001)) - 2000;
        int64_t st = 0;
        Word ref = e.T(x, r, st);
        Orbit fast = m.sp.T(x, Int(r));
        Orbit srch = m.sp.induced_search(x, m.s.K(), Int(r));
        REQUIRE(fast.y == ref);
        REQUIRE(fast.stime == st);
        REQUIRE(srch.y == ref);
        REQUIRE(srch.stime == st);
        if (i < 40) REQUIRE(m.sp.induced_steps(x, m.s.K(), r).y == ref);
    }
}

TEST_CASE("composition of T") {
    Mini m;
    Rng rng(9, 2);
    for (int i = 0; i < 50; ++i) {
        Word x = m.sp.sample_X(rng);
        Word y = x;
        for (int j = 0; j < 25; ++j) y = m.sp.T(y, Int(1)).y;
        CHECK(y == m.sp.T(x, Int(25)).y);
    }
}

TEST_CASE("Bad membership from visit counts matches a direct orbit walk") {
    Mini m;
    oracle::Enum e(m.s);
    Rng rng(11, 3);
    int b = 3;
    for (int i = 0; i < 300; ++i) {
        Word x = m.sp.sample_X(rng);
        long long r = 1 + static_cast<long long>(rng.below(300));
        // walk the S|Y_b orbit and look for a removed length-5 cylinder
        bool hit = false;
        for (int dir : {1, -1}) {
            Word y = x;
            for (long long s = 0; s <= r && !hit; ++s) {
                if (s > 0) y = m.sp.induced_steps(y, b, dir).y;
                if (!e.alive[5][e.value(y, 5)] && e.alive[4][e.value(y, 4)]) hit = true;
            }
        }
        CHECK((m.sp.in_bad(x, b, Int(r)) == Membership::In) == hit);
    }
}

TEST_CASE("paper schedule: X undecided, T refuses") {
    Schedule s = Schedule::paper(80);
    Tables tb = compute_tables(s);
    Space sp(s, tb);
    Word w(std::vector<long long>(80, 0));
    CHECK(sp.in_X(w) == Membership::Unknown);
    CHECK_THROWS_AS(sp.T(w, Int(1)), InsufficientPrecision);
    CHECK(sp.in_X(Word({8})) == Membership::Out);
    // S|Y_b is still fine
    CHECK(sp.induced(w, 70, Int(1)).y(1) == 1);
}
