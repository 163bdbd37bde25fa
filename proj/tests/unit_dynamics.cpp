#include "doctest.h"
#include "rank1lab/errors.hpp"
#include "rank1lab/measure.hpp"

using namespace rank1lab;

namespace {
struct Desk {
    Schedule s = Schedule::preset("desk");
    Tables tb = compute_tables(s);
    Space sp{s, tb};
    Measure me{sp};
};
}  // namespace

TEST_CASE("partial rigidity fraction stays above 1/9") {
    Desk D;
    Rng rng(41, 1);
    for (int n : {1, 6, 7, 12, 19, 20}) {
        auto r = partial_rigidity(D.sp, n, 2000, rng);
        INFO("n = " << n);
        CHECK(r.samples == 2000);
        CHECK(r.target == D.tb.t[static_cast<size_t>(n - 1)]);
        CHECK(r.ci.lo >= 1.0 / 9);
    }
    CHECK_THROWS_AS(partial_rigidity(D.sp, 21, 10, rng), PreconditionViolated);
}

TEST_CASE("weak mixing sets at bounded k") {
    Desk D;
    Rng rng(42, 1);
    for (int k : {3, 5, 9, 15, 20}) {
        auto r = weak_mixing_sets(D.me, k, 200, rng);
        INFO("k = " << k);
        CHECK(r.ok());
        CHECK(r.a_tested > 0);
        CHECK(r.b_tested > 0);
        CHECK(r.mu_A_cyl.lower > Rat(1, 99));
        CHECK(r.mu_B_cyl.lower > Rat(1, 99));
    }
    CHECK_THROWS_AS(weak_mixing_sets(D.me, 6, 10, rng), NotBoundedScale);
    CHECK_THROWS_AS(weak_mixing_sets(D.me, 7, 10, rng), NotBoundedScale);
}
