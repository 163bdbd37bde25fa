#include "rank1lab/errors.hpp"
#include "rank1lab/measure.hpp"

namespace rank1lab {

RigidityReport partial_rigidity(const Space& sp, int n, long long samples, Rng& rng) {
    const Tables& tb = sp.tables();
    if (n < 1 || n > tb.K) throw PreconditionViolated("partial rigidity: n outside [1, K]");
    RigidityReport rep;
    rep.n = n;
    rep.r = tb.p[static_cast<size_t>(n)];
    rep.target = tb.t[static_cast<size_t>(n - 1)];
    while (rep.samples < samples && rep.rejected < 10 * samples + 10) {
        Word x = sp.sample_X(rng);
        try {
            if (sp.T(x, rep.r).stime == rep.target) ++rep.hits;
            ++rep.samples;
        } catch (const InsufficientPrecision&) {
            ++rep.rejected;
        }
    }
    rep.fraction = rep.samples ? static_cast<double>(rep.hits) / static_cast<double>(rep.samples) : 0.0;
    rep.ci = wilson(rep.hits, rep.samples);
    return rep;
}

WeakMixReport weak_mixing_sets(const Measure& m, int k, long long samples, Rng& rng) {
    const Space& sp = m.space();
    const Schedule& s = sp.schedule();
    if (k < 2 || k > sp.K()) throw PreconditionViolated("weak mixing sets: k outside [2, K]");
    if (s.unbounded(k) || s.unbounded(k - 1)) throw NotBoundedScale("weak mixing sets need k and k-1 bounded");
    const Int& p = sp.tables().p[static_cast<size_t>(k)];
    ConstraintSet A = ConstraintSet::digit(k, DigitSet::of({1}));
    ConstraintSet B = ConstraintSet::digit(k, DigitSet::of({8})).intersect(ConstraintSet::digit(k - 1, DigitSet::range(0, 6)));
    WeakMixReport rep;
    rep.k = k;
    rep.mu_A_cyl = m.mu_interval(A);
    rep.mu_B_cyl = m.mu_interval(B);
    auto near = [&](const Word& y, const Word& ref) {
        int fd = first_difference(y, ref);
        return fd == 0 || fd >= k - 1;  // d <= 2^-(k-1)
    };
    for (long long i = 0; i < samples; ++i) {
        Word x = sample_in(m, A, rng);
        if (sp.in_bad(x, k, p) != Membership::Out) {
            ++rep.excluded_bad;
        } else {
            ++rep.a_tested;
            rep.a_far += !near(sp.T(x, p).y, x);
        }
        Word z = sample_in(m, B, rng);
        if (sp.in_bad(z, k, p) != Membership::Out) {
            ++rep.excluded_bad;
        } else {
            ++rep.b_tested;
            rep.b_far += !near(sp.T(z, p).y, sp.T(z, 1).y);
        }
    }
    return rep;
}

}  // namespace rank1lab
