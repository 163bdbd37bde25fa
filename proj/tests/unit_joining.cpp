#include "doctest.h"
#include "rank1lab/errors.hpp"
#include "rank1lab/joining.hpp"
#include "transport_oracle.hpp"

#include <cmath>

using namespace rank1lab;

namespace {

struct Desk {
    Schedule s = Schedule::preset("desk");
    Tables tb = compute_tables(s);
    Space sp{s, tb};
    Measure me{sp};
};

}  // namespace

TEST_CASE("joining times satisfy the tower relations") {
    Schedule paper = Schedule::paper();
    PQSeq pq = unbounded_heights(paper, 20);
    JoiningTimes jt = joining_times(pq, 20);
    CHECK(check_joining_relations(pq, jt, 20) == 0);
    CHECK(jt.alpha[0] == 1);
    CHECK(jt.gamma[0] == 0);
    CHECK(jt.alpha[1] == pq.P[1]);
    CHECK(jt.gamma[1] == 1 - pq.P[1]);

    Desk D;
    PQSeq dq = unbounded_heights(D.s, 3);
    CHECK(dq.P[1] == D.tb.P(1));
    CHECK(dq.Q[2] == D.tb.Q(2));
    CHECK(check_joining_relations(dq, joining_times(D.s, 3), 3) == 0);

    // a perturbed alpha breaks the first relation at that index
    JoiningTimes bad = jt;
    bad.alpha[7] += 1;
    CHECK(check_joining_relations(pq, bad, 20) == 7);
}

TEST_CASE("tower sets on desk") {
    Desk D;
    auto ts = tower_sets(D.sp, 1);
    CHECK(ts.a == 6);
    CHECK(ts.d == 8);
    // d = 8: {0,1,5..9} and {7..10} overlap
    DigitSet u0 = DigitSet::of({0, 1, 16, 17});
    u0.add(5, 10);
    CHECK(ts.u0 == u0);
    CHECK(tower_sets(D.sp, 2).u0.size() == 13);
    CHECK(ts.span == 9 * D.tb.P(1));
    CHECK(ts.v_time == 9 * (2 * D.tb.P(1) - D.tb.Q(1)) - 1);
    CHECK_THROWS_AS(tower_sets(D.sp, 4), NotUnboundedScale);
    CHECK_THROWS_AS(tower_sets(D.sp, 0), NotUnboundedScale);

    Schedule paper = Schedule::paper(40);
    Tables ptb = compute_tables(paper);
    Space psp(paper, ptb);
    CHECK_THROWS_AS(tower_sets(psp, 1), ScheduleTooLarge);
}

TEST_CASE("joining_prep lines on desk") {
    Desk D;
    Rng rng(22, 1);
    for (int k = 1; k <= 3; ++k) {
        auto rep = joining_prep(D.me, k, rng);
        INFO(rep.text());
        CHECK(rep.ok());
        CHECK(rep.line("PJ4").verdict == Verdict::Pass);
        CHECK(rep.line("PJ7").verdict == Verdict::Pass);
        CHECK(rep.line("PJ8").verdict == Verdict::Pass);
        CHECK(rep.min_return >= rep.sets.return_bound);
        CHECK(rep.mu_U0.lower == rep.mu_U0.upper);
    }
}

TEST_CASE("U_0 covering the alphabet empties A and B and fails PJ8") {
    Desk D;
    Rng rng(23, 1);
    PJOptions o;
    o.samples = 400;
    o.u0 = DigitSet::range(0, D.s.c(D.s.a(1)));
    auto rep = joining_prep(D.me, 1, rng, o);
    CHECK(rep.in_A == 0);
    CHECK(rep.in_B == 0);
    CHECK(rep.line("PJ8").verdict == Verdict::Fail);
    CHECK(!rep.ok());
}

TEST_CASE("empirical joining at r = 0 is diagonal") {
    Desk D;
    Rng rng(24, 1);
    auto e = empirical_joining(D.sp, 0, 500, 4, rng);
    CHECK(e.total() == 1);
    for (auto& [c, w] : e.atoms) CHECK(c.first == c.second);
    CHECK(kr_to_product(e) > 0);
}

TEST_CASE("second marginal matches the first (T preserves mu)") {
    Desk D;
    Rng rng(25, 1);
    const long long n = 20000;
    for (Int r : {Int(1), Int(12345), Int(-777), D.tb.P(2) + 3}) {
        auto e = empirical_joining(D.sp, r, n, 2, rng);
        REQUIRE(e.samples == n);
        auto [m1, m2] = e.marginals();
        std::map<Prefix, std::pair<double, double>> both;
        for (auto& [p, w] : m1) both[p].first = w.convert_to<double>();
        for (auto& [p, w] : m2) both[p].second = w.convert_to<double>();
        for (auto& [p, f] : both) {
            double q = (f.first + f.second) / 2;
            // the difference of two Bernoulli(q) indicators has variance at most 4q(1-q)
            double se = std::sqrt(4 * q * (1 - q) / static_cast<double>(n)) + 1e-12;
            INFO("r = " << r << " cell " << p[0] << ":" << p[1]);
            CHECK(std::fabs(f.first - f.second) <= 3 * se);
        }
    }
}

TEST_CASE("KR distance basics") {
    Prefix x{1, 2, 3, 4}, y{0, 0, 0, 0};
    auto a = point_mass(x, y);
    CHECK(kr_distance(a, a) == 0);
    for (int j = 1; j <= 4; ++j) {
        Prefix x2 = x;
        x2[static_cast<size_t>(j - 1)] += 1;
        CHECK(kr_distance(a, point_mass(x2, y)) == Rat(1, Int(1) << j));
        CHECK(kr_distance(point_mass(y, x), point_mass(y, x2)) == Rat(1, Int(1) << j));
    }
    CHECK_THROWS_AS(kr_distance(a, point_mass({1, 2}, {0, 0})), DepthMismatch);
    CHECK(truncation_slack(4) == Rat(1, 32));
    CHECK(kr_edge(1, 4) == Rat(1, 8));
    CHECK(kr_edge(4, 4) == Rat(1, 32));
}

TEST_CASE("KR closed form matches the transportation oracle") {
    Rng rng(26, 1);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        int depth = 1 + static_cast<int>(rng.below(4));
        auto a = oracle::random_joining(rng, depth, 20);
        auto b = oracle::random_joining(rng, depth, 20);
        double lp = oracle::kr(a, b);
        double cf = kr_distance(a, b).convert_to<double>();
        worst = std::max(worst, std::fabs(lp - cf));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("KR is a metric") {
    Rng rng(27, 1);
    for (int t = 0; t < 1000; ++t) {
        int depth = 1 + static_cast<int>(rng.below(4));
        auto a = oracle::random_joining(rng, depth, 8);
        auto b = oracle::random_joining(rng, depth, 8);
        auto c = t % 10 == 0 ? a : oracle::random_joining(rng, depth, 8);
        Rat ab = kr_distance(a, b), ba = kr_distance(b, a), ac = kr_distance(a, c), cb = kr_distance(c, b);
        CHECK(ab == ba);
        CHECK(ab <= ac + cb);
        CHECK((ac == 0) == (a.atoms == c.atoms));
    }
}

TEST_CASE("kr_to_product agrees with the explicit product") {
    Rng rng(28, 1);
    for (int t = 0; t < 50; ++t) {
        int depth = 1 + static_cast<int>(rng.below(4));
        auto e = oracle::random_joining(rng, depth, 12);
        CHECK(kr_to_product(e) == kr_distance(e, product_of_marginals(e)));
    }
    Desk D;
    auto e = empirical_joining(D.sp, 37, 800, 3, rng);
    CHECK(kr_to_product(e) == kr_distance(e, product_of_marginals(e)));
}

TEST_CASE("joining csv round trip") {
    Rng rng(29, 1);
    auto e = oracle::random_joining(rng, 3, 10, 12);
    std::string text = e.csv();
    CHECK(text.rfind("x,y,weight\n", 0) == 0);
    auto back = EmpiricalJoining::from_csv(text);
    CHECK(back.depth == 3);
    CHECK(back.atoms == e.atoms);
    CHECK(back.csv() == text);
    auto m = mixture(e, back, Rat(1, 3));
    CHECK(m.total() == 1);
    CHECK(kr_distance(m, e) == 0);
}

TEST_CASE("barycenter recursion: admissibility") {
    BarySequence s;
    s.a = {0, 0.6};
    s.b = {0, 0.5};
    s.delta = {0, 0};
    s.zeta = {{0.2, 0.8}, {0.5, 0.5}};
    CHECK_THROWS_AS(check_bary_admissible(s, 0.2), PreconditionViolated);
    s.a = {0, 0.1};
    s.b = {0, 0.9};
    CHECK_THROWS_AS(check_bary_admissible(s, 0.2), PreconditionViolated);
    s.a = {0, 0.5};
    s.b = {0, 0.4};
    CHECK_THROWS_AS(check_bary_admissible(s, 0.2), PreconditionViolated);
    s.b = {0, 0.5};
    s.zeta[1] = {0.5, 0.6};
    CHECK_THROWS_AS(check_bary_admissible(s, 0.2), PreconditionViolated);
}

TEST_CASE("barycenter recursion: exact averaging") {
    // d = 2, a = b = 1/2, delta = 0: one step reaches the average and stays there
    Rng rng(30, 1);
    std::vector<double> a(9, 0.5), b(9, 0.5), del(9, 0.0);
    auto s = bary_simulate(a, b, del, {0.2, 0.8}, rng);
    CHECK_NOTHROW(check_bary_admissible(s, 0.2));
    CHECK(bary_deviation(s, 0, 0) == doctest::Approx(0.3));
    for (int i = 1; i <= 8; ++i) {
        CHECK(s.zeta[static_cast<size_t>(i)][0] == doctest::Approx(0.5));
        CHECK(bary_deviation(s, 0, i) <= 0.3 * std::ldexp(1.0, -i) + 1e-15);
    }
}

TEST_CASE("barycenter recursion: random admissible sequences") {
    Rng rng(31, 1);
    for (int d : {2, 3}) {
        BaryOptions o;
        o.d = d;
        o.trials = 400;
        auto rep = bary_recursion_check(o, rng);
        INFO(rep.text());
        CHECK(rep.ok());
        CHECK(rep.checks > 0);
        CHECK(rep.rho < 1);
        CHECK(rep.rho_observed <= rep.rho + 1e-9);
    }
    BaryOptions bad;
    bad.c = 0.6;
    CHECK_THROWS_AS(bary_recursion_check(bad, rng), PreconditionViolated);
}

TEST_CASE("hypotheses of the joining construction on desk") {
    Desk D;
    Rng rng(32, 1);
    CEOptions o;
    o.samples = 300;
    o.kr_samples = 1000;
    o.pj.samples = 400;
    auto rep = check_prop_ce_hypotheses(D.me, 1, 3, rng, o);
    INFO(rep.text());
    CHECK(rep.ok());
    int j2 = 0, j5 = 0, j7_inc = 0;
    for (auto& l : rep.lines) {
        if (l.name == "J2") j2 += l.verdict == Verdict::Pass;
        if (l.name == "J5") j5 += l.verdict == Verdict::Pass;
        if (l.name == "J7") j7_inc += l.verdict == Verdict::Inconclusive;
    }
    CHECK(j2 == 3);
    CHECK(j5 == 3);
    CHECK(j7_inc == 1);
}

TEST_CASE("Cauchy evidence and mixing profile produce full reports") {
    Desk D;
    Rng rng(33, 1);
    auto c = joining_cauchy(D.sp, 3, 4000, 4, rng);
    CHECK(c.alpha.size() == 4);
    CHECK(c.d_alpha.size() == 3);
    CHECK(c.noise.size() == 3);
    CHECK(c.slack == Rat(1, 32));
    CHECK(c.mid_vs_product > 0);
    CHECK(c.text().find("monotone=") != std::string::npos);

    auto mx = mixing_profile(D.sp, 1000, rng);
    REQUIRE(mx.size() == static_cast<size_t>(D.s.K()));
    for (auto& p : mx) {
        CHECK(p.value >= 0);
        CHECK(p.value <= 1);
        CHECK(p.r == D.tb.p[static_cast<size_t>(p.k)]);
    }
    CHECK(mx[0].value > 0.05);
}
