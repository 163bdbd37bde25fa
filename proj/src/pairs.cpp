#include "rank1lab/pairs.hpp"

#include "rank1lab/errors.hpp"

#include <optional>
#include <sstream>

namespace rank1lab {

namespace {

// S-time of (S|Y_b)^n; Y_0 is the whole space
Int stime_at(const Space& sp, const Word& w, int b, const Int& n) {
    if (b == 0) return n;
    return sp.stime(w, b, n);
}

Int rank_at(const Space& sp, const Word& w, int b) { return b == 0 ? Int(0) : sp.rank(w, b); }

Int rank7(const Space& sp, int k) {
    if (k == 0) return 0;
    return sp.rank(Word(std::vector<long long>(k, 7)), k);
}

Membership both_in_X(const Space& sp, const Word& y, const Word& z, std::string& clause) {
    Membership a = sp.in_X(y), b = sp.in_X(z);
    if (a == Membership::Out || b == Membership::Out) {
        clause = "X";
        return Membership::Out;
    }
    if (a == Membership::Unknown || b == Membership::Unknown) {
        clause = "X";
        return Membership::Unknown;
    }
    return Membership::In;
}

// #{1 <= |h| <= |r| : (S|Y_{j-1})^h z in W_j}, sign of h that of r
Int hits(const Space& sp, const Word& z, int j, const Int& r) {
    Int s = stime_at(sp, z, j - 1, r);
    return r > 0 ? sp.visits(z, j, 1, s) : sp.visits(z, j, s, -1);
}

PairResult result(Membership m, std::string clause, Int w = 0) {
    PairResult p;
    p.m = m;
    p.clause = std::move(clause);
    p.witness = std::move(w);
    return p;
}

}  // namespace

const char* to_string(PairKind k) { return k == PairKind::Buddy ? "buddy" : "friendly"; }

std::string PairCertificate::csv_header() { return "kind,r,j,witness,y,z"; }

std::string PairCertificate::csv_row() const {
    std::ostringstream os;
    os << to_string(kind) << ',' << r << ',' << j << ',' << witness << ",\"" << y.str() << "\",\"" << z.str() << '"';
    return os.str();
}

PairResult is_buddy(const Space& sp, const Word& y, const Word& z, const Int& r, int j) {
    if (j < 1 || j > sp.K() + 1) throw PreconditionViolated("buddy scale out of range");
    std::string clause;
    Membership xm = both_in_X(sp, y, z, clause);
    if (xm != Membership::In) return result(xm, clause);
    if (y.L() < j - 1 || z.L() < j - 1) return result(Membership::Unknown, "1");
    if (!agree(y, z, j - 1)) return result(Membership::Out, "1");
    Word ty, tz;
    try {
        ty = sp.T(y, r).y;
        tz = sp.T(z, r).y;
    } catch (const InsufficientPrecision&) {
        return result(Membership::Unknown, "2");
    }
    const Int& N = sp.tables().N(j - 1);
    Int delta = floor_mod(rank_at(sp, tz, j - 1) - rank_at(sp, ty, j - 1), N);
    for (long long i = 1; i < 9; ++i)
        for (long long s : {i, -i})
            if (floor_mod(Int(s) - delta, N) == 0) return result(Membership::In, "", Int(s));
    return result(Membership::Out, "2");
}

PairResult is_friendly(const Space& sp, const Word& y, const Word& z, const Int& r, int j) {
    const Schedule& s = sp.schedule();
    if (j < 1 || j > sp.K()) throw PreconditionViolated("friendly scale out of range");
    if (s.unbounded(j)) throw NotBoundedScale("friendly pairs live at bounded scales; j = " + std::to_string(j));
    std::string clause;
    Membership xm = both_in_X(sp, y, z, clause);
    if (xm != Membership::In) return result(xm, clause);
    if (!agree(y, z, j - 1)) return result(Membership::Out, "F1");
    if (r == 0) return result(Membership::Out, "F5");
    const int K = sp.K();
    Int n = r > 0 ? Int(r + 1) : Int(r - 1);
    if (sp.stime(y, K, n) != sp.stime(y, j, n)) return result(Membership::Out, "F2");
    if (sp.stime(z, K, n) != sp.stime(z, j, n)) return result(Membership::Out, "F3");
    if (stime_at(sp, y, j - 1, n) != sp.stime(y, j, n)) return result(Membership::Out, "F4");
    if (hits(sp, z, j, r) != 1) return result(Membership::Out, "F5");
    // the hit time: least |h| whose window already holds the visit
    Int lo = 1, hi = iabs(r);
    int sg = r > 0 ? 1 : -1;
    while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (hits(sp, z, j, mid * sg) >= 1)
            hi = mid;
        else
            lo = mid + 1;
    }
    return result(Membership::In, "", lo * sg);
}

bool recheck(const Space& sp, const PairCertificate& c) {
    PairResult p = c.kind == PairKind::Buddy ? is_buddy(sp, c.y, c.z, c.r, c.j) : is_friendly(sp, c.y, c.z, c.r, c.j);
    return p.m == Membership::In && p.witness == c.witness;
}

TransportReport verify_buddy_transport(const Space& sp, const Word& y, const Word& z, const Int& r, const Int& u, int j,
                                       int J) {
    if (!(j < J)) throw HypothesisFails("j < J");
    Word ty, tz, uy, uz;
    try {
        ty = sp.T(y, r).y;
        uy = sp.T(y, u).y;
        tz = sp.T(z, r).y;
        uz = sp.T(z, u).y;
    } catch (const InsufficientPrecision& e) {
        throw HypothesisFails(std::string("T undecided: ") + e.what());
    }
    if (!agree(ty, uy, J - 1)) throw HypothesisFails("1: T^r(y) and T^u(y) differ below J");
    if (!agree(tz, uz, J - 1)) throw HypothesisFails("2: T^r(z) and T^u(z) differ below J");
    PairResult pr = is_buddy(sp, y, z, r, j);
    if (pr.m != Membership::In) throw HypothesisFails("3: not (r,j) buddies, clause " + pr.clause);
    PairResult pu = is_buddy(sp, y, z, u, j);
    TransportReport rep;
    rep.holds = pu.m == Membership::In;
    rep.witness_r = pr.witness;
    rep.witness_u = pu.witness;
    return rep;
}

const char* to_string(PhiMode m) {
    switch (m) {
        case PhiMode::Bounded: return "bounded";
        case PhiMode::Small: return "small";
        case PhiMode::SmallE: return "small-e";
        default: return "boundary";
    }
}

PhiMode parse_phi_mode(const std::string& s) {
    if (s == "bounded") return PhiMode::Bounded;
    if (s == "small") return PhiMode::Small;
    if (s == "small-e" || s == "small_e") return PhiMode::SmallE;
    if (s == "boundary") return PhiMode::Boundary;
    throw ConfigError("mode: expected bounded, small, small-e or boundary, got " + s);
}

Word PhiMap::partner(const Word& x) const {
    Word w = x;
    w.at(digit) += shift;
    return w;
}

std::pair<Word, Word> PhiMap::pair(const Word& x) const {
    Word p = partner(x);
    return sample_is_z ? std::make_pair(p, x) : std::make_pair(x, p);
}

PhiMap phi_bounded(const Space& sp, const Numeration& nm, const Int& r) {
    const Schedule& s = sp.schedule();
    PhiMap f;
    f.mode = PhiMode::Bounded;
    f.r = r;
    f.J = nm.scale(r);
    if (f.J == 0) throw PreconditionViolated("r = 0 has no scale");
    if (s.unbounded(f.J)) throw NotBoundedScale("J(r) = " + std::to_string(f.J) + " is unbounded");
    if (f.J > sp.K()) throw ScaleOverflow("J(r) beyond the horizon");
    const int J = f.J, k = J - 1;
    Int r7 = rank7(sp, k), ar = iabs(r);
    // prefixes that meet 7^(J-1) in column 8 within |r|-1 steps of S|Y_(J-1)
    f.B = r < 0 ? rank_window(sp, k, r7 + 1, r7 + ar - 1) : rank_window(sp, k, r7 - ar + 1, r7 - 1);
    f.B = f.B.intersect(ConstraintSet::digit(J, DigitSet::of({8})));
    if (J + 1 <= sp.K()) {
        long long c1 = s.c(J + 1) + 1;
        f.B = f.B.intersect(ConstraintSet::digit(J + 1, DigitSet::range((c1 + 4) / 5, c1 / 2)));
    }
    f.pair_scale = J;
    f.digit = J;
    f.shift = r < 0 ? -2 : 1;  // 8 -> 6 going down, 8 -> 9 going up
    f.sample_is_z = true;
    f.bad_scale = J;
    f.bad_time = 8 * r;
    f.nu_floor = Rat(1, 1000);
    f.mu_floor = Rat(1, 100000);
    return f;
}

PhiMap phi_small(const Space& sp, const Numeration& nm, const Int& r) {
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    PhiMap f;
    f.mode = PhiMode::Small;
    f.r = r;
    f.J = nm.scale(r);
    const int b = f.J;
    if (b < 2 || s.unbounded(b - 1)) throw PreconditionViolated("J(r) - 1 must be a bounded scale");
    if (4 * iabs(r) > 3 * tb.p[b]) throw PreconditionViolated("|r| exceeds 3/4 p(J(r))");
    if (!s.unbounded(b)) throw PreconditionViolated("J(r) bounded; the bounded construction covers it");
    if (b > sp.K()) throw ScaleOverflow("J(r) beyond the horizon");
    long long d = s.d(s.index_of(b));
    if (r > 0) {
        f.B = ConstraintSet::digit(b - 1, DigitSet::of({9})).intersect(ConstraintSet::digit(b, DigitSet::range(0, d - 3)));
        f.shift = -3;  // 9 -> 6
    } else {
        f.B = ConstraintSet::digit(b - 1, DigitSet::of({7})).intersect(ConstraintSet::digit(b, DigitSet::range(3, d)));
        f.shift = 2;  // 7 -> 9
    }
    if (b + 1 <= sp.K())
        f.B = f.B.intersect(ConstraintSet::digit(b + 1, DigitSet::of({6, 7, 8}).complement(s.c(b + 1))));
    f.pair_scale = b - 1;
    f.digit = b - 1;
    f.sample_is_z = false;
    f.bad_scale = b;
    f.bad_time = 2 * r;
    f.mu_floor = Rat(1, 100000);
    return f;
}

PhiMap phi_small_e(const Space& sp, const Numeration& nm, const Int& r) {
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    PhiMap f;
    f.mode = PhiMode::SmallE;
    f.r = r;
    f.J = nm.scale(r);
    const int J = f.J;
    if (J == 0 || !s.unbounded(J)) throw PreconditionViolated("J(r) must be an unbounded scale");
    long long e = nm.lst(r);
    if (e <= -10 || e >= 10) throw PreconditionViolated("|lst(r)| must be below 10");
    if (J + 1 > sp.K()) throw ScaleOverflow("J(r) + 1 beyond the horizon");
    const Int& N = tb.N(J);
    Int r7 = rank7(sp, J), ar = iabs(r);
    // (S|Y_J)^i x in W_(J+1) for some 0 <= |i| < |r|: directly in column 8, or after the carry
    ConstraintSet direct, carried;
    if (r > 0) {
        direct = rank_window(sp, J, r7 - ar + 1, r7);
        carried = rank_window(sp, J, N + r7 - ar + 1, N - 1);
    } else {
        direct = rank_window(sp, J, r7, r7 + ar - 1);
        carried = rank_window(sp, J, 0, r7 + ar - 1 - N);
    }
    f.B = direct.intersect(ConstraintSet::digit(J + 1, DigitSet::of({8})))
              .unite(carried.intersect(ConstraintSet::digit(J + 1, DigitSet::of({r > 0 ? 7LL : 9LL}))));
    if (J + 2 <= sp.K()) f.B = f.B.intersect(ConstraintSet::digit(J + 2, DigitSet::of({5})));
    f.pair_scale = J + 1;
    f.digit = J + 1;
    f.shift = -4;
    f.sample_is_z = true;
    f.bad_scale = J + 1;
    f.bad_time = r > 0 ? Int(r + 1) : Int(r - 1);
    f.screen_partner = true;
    f.mu_floor = Rat(1, 800 * s.d(s.index_of(J)));
    return f;
}

PhiMap phi_boundary(const Space& sp, const Numeration& nm, const Int& r) {
    const Schedule& s = sp.schedule();
    PhiMap f;
    f.mode = PhiMode::Boundary;
    f.r = r;
    f.J = nm.scale(r);
    const int J = f.J;
    if (J == 0 || !s.unbounded(J)) throw PreconditionViolated("J(r) must be an unbounded scale");
    long long e = nm.lst(r), c = s.c(J);
    if (e > -10 && e < 10) throw PreconditionViolated("|lst(r)| below 10; use the small-e construction");
    if (J + 1 > sp.K()) throw ScaleOverflow("J(r) + 1 beyond the horizon");
    DigitSet at = r > 0 ? DigitSet::range(c - e + 10, c) : DigitSet::range(10, 1 - e);
    long long next = r > 0 ? 7 : 8;
    f.B = ConstraintSet::digit(J, at).intersect(ConstraintSet::digit(J + 1, DigitSet::of({next})));
    f.pair_scale = J + 1;
    f.digit = J + 1;
    f.shift = 3 - next;
    f.sample_is_z = true;
    f.bad_scale = J;
    f.bad_time = r > 0 ? Int(r + 1) : Int(r - 1);
    f.screen_partner = true;
    return f;
}

PhiMap phi_map(PhiMode mode, const Space& sp, const Numeration& nm, const Int& r) {
    switch (mode) {
        case PhiMode::Bounded: return phi_bounded(sp, nm, r);
        case PhiMode::Small: return phi_small(sp, nm, r);
        case PhiMode::SmallE: return phi_small_e(sp, nm, r);
        default: return phi_boundary(sp, nm, r);
    }
}

PhiReport run_phi(const Measure& m, const PhiMap& phi, long long samples, Rng& rng, size_t keep) {
    const Space& sp = m.space();
    PhiReport rep;
    rep.map = phi;
    rep.nu_B = m.nu_surviving(phi.B, sp.K());
    rep.mu_B = m.mu_interval(phi.B);
    if (rep.nu_B == 0) return rep;
    for (long long n = 0; n < samples; ++n) {
        Word x = sample_in(m, phi.B, rng, &rep.proposals_rejected);
        ++rep.sampled;
        if (sp.in_bad(x, phi.bad_scale, phi.bad_time) == Membership::In) {
            ++rep.excluded_bad;
            continue;
        }
        Word p = phi.partner(x);
        if (sp.in_X(p) != Membership::In) {
            ++rep.partner_outside_X;
            if (rep.first_failure.empty()) rep.first_failure = "partner outside X: " + p.str();
            continue;
        }
        if (phi.screen_partner && sp.in_bad(p, phi.bad_scale, phi.bad_time) == Membership::In) {
            ++rep.excluded_bad;
            continue;
        }
        auto [y, z] = phi.pair(x);
        PairResult f = is_friendly(sp, y, z, phi.r, phi.pair_scale);
        if (f.m != Membership::In) {
            ++rep.not_friendly;
            if (rep.first_failure.empty()) rep.first_failure = f.clause + " at z = " + z.str();
            continue;
        }
        ++rep.friendly;
        PairResult bd = is_buddy(sp, y, z, phi.r, phi.pair_scale);
        if (bd.m == Membership::In) {
            ++rep.buddy;
            if (iabs(bd.witness) == 1) ++rep.buddy_unit;
        }
        if (rep.kept.size() < keep) rep.kept.push_back({y, z, phi.r, phi.pair_scale, PairKind::Friendly, f.witness});
    }
    return rep;
}

LemmaReport check_reduction_corollaries(const Measure& m, const Numeration& nm, const Int& r, long long samples,
                                        Rng& rng) {
    const Space& sp = m.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    const int J = nm.scale(r);
    if (r == 0 || !s.unbounded(J)) throw NotUnboundedScale("corollaries need J(r) unbounded");
    if (J + 1 > sp.K()) throw ScaleOverflow("J(r) + 1 beyond the horizon");
    const long long d = s.d(s.index_of(J)), c = s.c(J), e = nm.lst(r);
    const Int L = nm.L(r), R = nm.R(r);
    const bool pos = r > 0;
    const Int N = tb.N(J), N0 = tb.N(J - 1);
    LemmaReport rep;

    auto sample_digit = [&](long long lo, long long hi, std::optional<long long> next) {
        ConstraintSet cs = ConstraintSet::digit(J, DigitSet::range(lo, hi));
        if (next) cs = cs.intersect(ConstraintSet::digit(J + 1, DigitSet::of({*next})));
        return sample_in(m, cs, rng);
    };
    auto feasible = [&](long long lo, long long hi) { return lo <= hi && m.nu_surviving(ConstraintSet::digit(J, DigitSet::range(lo, hi)), sp.K()) > 0; };
    auto agree_S = [&](const Word& x, const Int& u) {
        return agree(sp.induced(x, J, r).y, sp.induced(x, J, u).y, J - 1);
    };
    auto agree_T = [&](const Word& x, const Int& u) {
        Word a = sp.T(x, r).y, b = sp.T(x, u).y;
        return a == sp.induced(x, J, r).y && b == sp.induced(x, J, u).y && agree(a, b, J - 1);
    };
    const std::string side = pos ? "pos" : "neg";

    struct Range {
        std::string name;
        long long lo, hi;
        Int u;
        bool T;
    };
    std::vector<Range> ranges;
    if (pos) {
        ranges = {{"S-left", 1, d - e, L, false},
                  {"S-right", d + 2, c - e, R, false},
                  {"T-left", 9, d - e, L, true},
                  {"T-right", d + 2, c - e, R, true}};
    } else {
        ranges = {{"S-left", 1 - e, d - 1, L, false},
                  {"S-right", d + 2 - e, c - 2, R, false},
                  {"T-left", 10 - e, d - 1, L, true},
                  {"T-right", d + 2 - e, c - 2, R, true}};
    }
    for (auto& rg : ranges) {
        LemmaTally& t = rep.line(side + "-red-" + rg.name);
        if (!feasible(rg.lo, rg.hi)) {
            ++t.skipped;
            continue;
        }
        for (long long n = 0; n < samples; ++n) {
            Word x = sample_digit(rg.lo, rg.hi, std::nullopt);
            if (rg.T && sp.in_bad(x, J, r) == Membership::In) {
                ++t.skipped;
                continue;
            }
            ++t.tested;
            bool ok = rg.T ? agree_T(x, rg.u) : agree_S(x, rg.u);
            if (!ok) t.fail(x.str());
        }
    }

    // boundary digits: the orbit wraps through column 0, and with the right next digit meets W_(J+1)
    bool big = pos ? e >= 11 : e <= -11;
    long long blo = pos ? c - e + 10 : 10, bhi = pos ? c : 1 - e;
    long long nextd = pos ? 7 : 8;
    LemmaTally& tb0 = rep.line(side + "-red-S-bdd");
    LemmaTally& th = rep.line(side + "-red-S-bdd-hit");
    LemmaTally& tf = rep.line(side + "-red-T-friends");
    if (!big || !feasible(blo, bhi)) {
        ++tb0.skipped;
        ++th.skipped;
        ++tf.skipped;
        return rep;
    }
    for (long long n = 0; n < samples; ++n) {
        Word x = sample_digit(blo, bhi, std::nullopt);
        Int rho = sp.rank(x, J);
        bool wraps = pos ? (rho < N0 || rho + r - 1 >= N) : (rho - iabs(r) <= N0 - 1);
        ++tb0.tested;
        if (!wraps) tb0.fail("x(J)=" + std::to_string(x(J)) + " " + x.str());
        if (!pos && x(J) <= -e) {
            LemmaTally& ti = rep.line(side + "-red-S-bdd-inner");
            ++ti.tested;
            if (!wraps) ti.fail("x(J)=" + std::to_string(x(J)) + " " + x.str());
        }
    }
    for (long long n = 0; n < samples; ++n) {
        Word x = sample_digit(blo, bhi, nextd);
        Int st = sp.stime(x, J, r);
        bool hit = pos ? sp.visits(x, J + 1, 0, st) > 0 : sp.visits(x, J + 1, st, 0) > 0;
        ++th.tested;
        if (!hit) th.fail("x(J)=" + std::to_string(x(J)) + " " + x.str());
        Int wide = pos ? Int(r + 1) : Int(r - 1);
        if (sp.in_bad(x, J, wide) == Membership::In) {
            ++tf.skipped;
            continue;
        }
        Word y = x;
        y.at(J + 1) = 3;
        if (sp.in_X(y) != Membership::In || sp.in_bad(y, J, r) == Membership::In) {
            ++tf.skipped;
            continue;
        }
        ++tf.tested;
        PairResult f = is_friendly(sp, y, x, r, J + 1);
        if (f.m != Membership::In) tf.fail(f.clause + " at " + x.str());
    }
    return rep;
}

}  // namespace rank1lab
