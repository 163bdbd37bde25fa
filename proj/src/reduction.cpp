#include "rank1lab/reduction.hpp"

#include "rank1lab/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rank1lab {

namespace {

bool unb(const Schedule& s, int J) { return J >= 1 && s.unbounded(J); }
bool bnd(const Schedule& s, int J) { return J >= 1 && !s.unbounded(J); }

struct Windows {
    DigitSet L, R, F;
};

// digit windows at the scale of n: hypotheses of the T-level reductions and the rest
Windows windows(const Schedule& s, int sign, long long e, int J) {
    long long c = s.c(J), d = s.d(s.index_of(J));
    Windows w;
    if (sign > 0) {
        w.L = DigitSet::range(9, d - e);
        w.R = DigitSet::range(d + 2, c - e);
        w.F = DigitSet::range(0, 8);
        w.F.add(d - e + 1, d + 1).add(c - e + 1, c);
    } else {
        w.L = DigitSet::range(10 - e, d - 1);
        w.R = DigitSet::range(d + 2 - e, c - 2);
        w.F = DigitSet::range(0, 9 - e);
        w.F.add(d, d + 1 - e).add(c - 1, c);
    }
    DigitSet all = DigitSet::range(0, c);
    w.L = w.L.intersect(all);
    w.R = w.R.intersect(all);
    w.F = w.F.intersect(all);
    return w;
}

// first hypotheses of the S-level reductions
DigitSet s_window(const Schedule& s, int sign, long long e, int J, char side) {
    long long c = s.c(J), d = s.d(s.index_of(J));
    if (sign > 0) return side == 'L' ? DigitSet::range(1, d - e) : DigitSet::range(d + 2, c - e);
    return side == 'L' ? DigitSet::range(1 - e, d - 1) : DigitSet::range(d + 2 - e, c - 2);
}

bool subset(const DigitSet& a, const DigitSet& b) { return a.minus(b).empty(); }

nlohmann::json constraint_json(const Constraint& c) {
    nlohmann::json j = nlohmann::json::object();
    for (auto& [k, ds] : c.allowed) {
        nlohmann::json iv = nlohmann::json::array();
        for (auto& [a, b] : ds.intervals()) iv.push_back({a, b});
        j[std::to_string(k)] = iv;
    }
    return j;
}

}  // namespace

const char* to_string(FriendSource f) {
    switch (f) {
        case FriendSource::Bounded: return "bounded";
        case FriendSource::Small: return "small";
        case FriendSource::Friends: return "friends";
        case FriendSource::Paired: return "paired";
        default: return "none";
    }
}

int default_tau_floor(const Schedule& s) {
    int n = std::min<int>(3, s.count());
    return static_cast<int>(s.a(n));
}

ConstraintSet ReductionTrace::A0(int i) const {
    ConstraintSet out;
    if (i < 1 || i > static_cast<int>(levels.size())) return out;
    for (int p : levels[i - 1].a0) out.add(parts[p].set);
    return out;
}

std::string ReductionTrace::json() const {
    nlohmann::json j;
    j["m"] = m.str();
    j["tau"] = tau;
    j["J_m"] = Jm;
    j["I"] = I;
    nlohmann::json lv = nlohmann::json::array();
    for (auto& L : levels) {
        nlohmann::json l;
        l["i"] = L.i;
        l["scale_prev"] = L.scale_prev;
        l["scale"] = L.scale;
        l["A0"] = L.a0;
        l["notes"] = L.notes;
        nlohmann::json es = nlohmann::json::array();
        for (auto& e : L.entries) {
            nlohmann::json x;
            x["set"] = constraint_json(e.set);
            x["n"] = e.n.str();
            x["ancestor"] = e.ancestor;
            x["pair"] = e.pair;
            x["path"] = e.path;
            x["reducible"] = e.reducible;
            x["bad_clauses"] = e.bad_clauses;
            es.push_back(x);
        }
        l["entries"] = es;
        lv.push_back(l);
    }
    j["levels"] = lv;
    nlohmann::json ps = nlohmann::json::array();
    for (auto& p : parts) {
        nlohmann::json x;
        x["set"] = constraint_json(p.set);
        x["level"] = p.level;
        x["why"] = p.why;
        x["source"] = to_string(p.source);
        x["r"] = p.source_r.str();
        x["buddy_scale"] = p.buddy_scale;
        x["partner"] = p.partner;
        ps.push_back(x);
    }
    j["parts"] = ps;
    return j.dump(2);
}

namespace {

struct Builder {
    const Numeration& nm;
    const Schedule& s;
    const Tables& tb;
    ReductionTrace& tr;

    // Friend source handed to a part that leaves through F or a bad clause.
    int add_part(const Constraint& c, int level, std::string why, FriendSource src, const Int& r, int bscale,
                 const std::vector<Int>& lineage, std::optional<Constraint> side = std::nullopt) {
        A0Part p;
        p.set = c;
        p.level = level;
        p.why = std::move(why);
        p.source = src;
        p.source_r = r;
        p.buddy_scale = bscale;
        p.lineage = lineage;
        p.side = std::move(side);
        tr.parts.push_back(std::move(p));
        return static_cast<int>(tr.parts.size()) - 1;
    }

    int friends_part(const Constraint& c, int level, std::string why, const Int& n, const std::vector<Int>& lineage) {
        return add_part(c, level, std::move(why), FriendSource::Friends, n, nm.scale(n) + 1, lineage);
    }

    // the bounded-theorem source for a reduction s of n at a bounded scale; T^s tracks T^n on the matching window
    int bounded_part(const Constraint& c, int level, std::string why, const Int& n, const Int& red, char side,
                     const std::vector<Int>& lineage) {
        int J = nm.scale(n);
        Windows w = windows(s, n > 0 ? 1 : -1, nm.lst(n), J);
        Constraint win;
        win.allowed[J] = side == 'L' ? w.L : w.R;
        return add_part(c, level, std::move(why), FriendSource::Bounded, red, nm.scale(red), lineage, win);
    }

    void initial() {
        const Int& m = tr.m;
        const int J = tr.Jm;
        ReductionLevel L1;
        L1.i = 1;
        L1.scale_prev = J;
        L1.scale = static_cast<int>(s.lambda(J));
        Int Lm = nm.L(m), Rm = nm.R(m);
        int JL = nm.scale(Lm), JR = nm.scale(Rm);
        std::vector<Int> root{m};
        bool Lbig = bnd(s, JL) && JL >= tr.tau, Rbig = bnd(s, JR) && JR >= tr.tau;
        if (!(unb(s, JL) && unb(s, JR)) && (Lbig || Rbig)) {
            bool useL = Lbig;
            if (Lbig && Rbig) useL = !windows(s, m > 0 ? 1 : -1, nm.lst(m), J).L.empty();
            else if (Rbig && windows(s, m > 0 ? 1 : -1, nm.lst(m), J).R.empty() && JL >= 1)
                L1.notes.push_back("R window empty at J(m), bounded source has no domain");
            else if (Lbig && windows(s, m > 0 ? 1 : -1, nm.lst(m), J).L.empty())
                L1.notes.push_back("L window empty at J(m), bounded source has no domain");
            Int red = useL ? Lm : Rm;
            int p = bounded_part(Constraint{}, 1, "initial: reduction at a bounded scale >= tau", m, red,
                                 useL ? 'L' : 'R', root);
            L1.a0.push_back(p);
            tr.levels.push_back(std::move(L1));
            return;
        }
        if (!unb(s, JL) && !unb(s, JR)) {
            int p = add_part(Constraint{}, 1, "initial: both reductions below tau", FriendSource::None, 0, 0, root);
            L1.a0.push_back(p);
            L1.notes.push_back("both L(m) and R(m) at bounded scales below tau");
            tr.levels.push_back(std::move(L1));
            return;
        }
        int sg = m > 0 ? 1 : -1;
        long long e = nm.lst(m);
        Windows w = windows(s, sg, e, J);
        Constraint cf;
        cf.allowed[J] = w.F;
        L1.a0.push_back(friends_part(cf, 1, "initial: outside both windows", m, root));
        for (char side : {'L', 'R'}) {
            ReductionEntry en;
            en.set.allowed[J] = side == 'L' ? w.L : w.R;
            en.n = side == 'L' ? Lm : Rm;
            en.path = std::string(1, side);
            en.tags[J] = {side, sg, e};
            en.lineage = {en.n, m};
            L1.entries.push_back(std::move(en));
        }
        L1.entries[0].pair = 2;
        L1.entries[1].pair = 1;
        tr.levels.push_back(std::move(L1));
    }

    std::vector<std::string> bad_clauses(const ReductionEntry& x, const char* who, int scale) {
        std::vector<std::string> out;
        if (nm.scale(x.n) != scale) return out;
        if (4 * iabs(x.n) < 3 * tb.p[scale]) out.push_back(std::string(who) + "-small");
        int JL = nm.scale(nm.L(x.n)), JR = nm.scale(nm.R(x.n));
        if (bnd(s, JL) && JL >= tr.tau) out.push_back(std::string(who) + "-L-bounded");
        if (bnd(s, JR) && JR >= tr.tau) out.push_back(std::string(who) + "-R-bounded");
        return out;
    }

    // the part of a bad pair member that carries the friend construction
    int bad_source(const ReductionEntry& x, const std::string& clause, int level, int scale) {
        std::string why = "bad pair: " + clause;
        if (clause.ends_with("-small"))
            return add_part(x.set, level, why, FriendSource::Small, x.n, scale - 1, x.lineage);
        bool left = clause.ends_with("-L-bounded");
        Int red = left ? nm.L(x.n) : nm.R(x.n);
        return bounded_part(x.set, level, why, x.n, red, left ? 'L' : 'R', x.lineage);
    }

    void step(int i) {
        ReductionLevel& cur = tr.levels[i - 1];
        ReductionLevel nx;
        nx.i = i + 1;
        nx.scale_prev = cur.scale;
        nx.scale = static_cast<int>(s.lambda(cur.scale));
        nx.a0 = cur.a0;
        const int scale = cur.scale;
        auto& E = cur.entries;
        std::vector<int> slot(E.size() + 1, 0);  // first child index (1-based) of each parent
        struct PairPlan {
            int j, h;
            bool both;
            bool sub2;
        };
        std::vector<PairPlan> plans;
        for (size_t a = 1; a <= E.size(); ++a) {
            size_t b = static_cast<size_t>(E[a - 1].pair);
            if (b < a) continue;
            ReductionEntry& A = E[a - 1];
            ReductionEntry& B = E[b - 1];
            auto ca = bad_clauses(A, "j", scale), cb = bad_clauses(B, "h", scale);
            if (!ca.empty() || !cb.empty()) {
                std::vector<std::string> all = ca;
                all.insert(all.end(), cb.begin(), cb.end());
                A.bad_clauses = all;
                B.bad_clauses = all;
                ReductionEntry& src = ca.empty() ? B : A;
                ReductionEntry& oth = ca.empty() ? A : B;
                const std::string& cl = ca.empty() ? cb.front() : ca.front();
                int ps = bad_source(src, cl, i + 1, scale);
                int po = add_part(oth.set, i + 1, "bad pair: partner of " + cl, FriendSource::Paired, 0, 0, oth.lineage);
                tr.parts[po].partner = ps;
                nx.a0.push_back(ps);
                nx.a0.push_back(po);
                continue;
            }
            A.reducible = nm.scale(A.n) == scale;
            B.reducible = nm.scale(B.n) == scale;
            if (!A.reducible && !B.reducible) {
                // cannot happen under E5; keep the sets in A_0 and say so
                nx.notes.push_back("pair " + std::to_string(a) + "," + std::to_string(b) + " has no time at scale " +
                                   std::to_string(scale));
                nx.a0.push_back(add_part(A.set, i + 1, "unreduced pair", FriendSource::None, 0, 0, A.lineage));
                nx.a0.push_back(add_part(B.set, i + 1, "unreduced pair", FriendSource::None, 0, 0, B.lineage));
                continue;
            }
            int j = A.reducible ? static_cast<int>(a) : static_cast<int>(b);
            int h = A.reducible ? static_cast<int>(b) : static_cast<int>(a);
            bool both = A.reducible && B.reducible;
            bool sub2 = !both && nm.scale(E[h - 1].n) != nx.scale;
            plans.push_back({j, h, both, sub2});
        }
        auto children = [&](int x, int lead) {
            ReductionEntry& P = E[x - 1];
            const ReductionEntry& D = E[lead - 1];
            int sg = D.n > 0 ? 1 : -1;
            long long e = nm.lst(D.n);
            int J = nm.scale(D.n);
            Windows w = windows(s, sg, e, J);
            Constraint cf = P.set.with(J, w.F);
            int pf = x == lead ? friends_part(cf, i + 1, "F(j)", P.n, P.lineage)
                               : add_part(cf, i + 1, "F(h)", FriendSource::Paired, 0, 0, P.lineage);
            nx.a0.push_back(pf);
            slot[x] = static_cast<int>(nx.entries.size()) + 1;
            for (char side : {'L', 'R'}) {
                ReductionEntry c;
                c.set = P.set.with(J, side == 'L' ? w.L : w.R);
                c.n = x == lead ? (side == 'L' ? nm.L(P.n) : nm.R(P.n)) : P.n;
                c.ancestor = x;
                c.path = P.path + side;
                c.tags = P.tags;
                c.tags[J] = {side, sg, e};
                c.lineage = P.lineage;
                c.lineage.insert(c.lineage.begin(), c.n);
                nx.entries.push_back(std::move(c));
            }
            return pf;
        };
        for (auto& pl : plans) {
            int pf_j = children(pl.j, pl.j);
            int pf_h = children(pl.h, pl.both ? pl.h : pl.j);
            if (!pl.both) tr.parts[pf_h].partner = pf_j;
            int lj = slot[pl.j], lh = slot[pl.h];
            auto link = [&](int u, int v) {
                nx.entries[u - 1].pair = v;
                nx.entries[v - 1].pair = u;
            };
            if (pl.sub2) {
                link(lj, lh);
                link(lj + 1, lh + 1);
            } else {
                link(lj, lj + 1);
                link(lh, lh + 1);
            }
        }
        tr.levels.push_back(std::move(nx));
    }
};

}  // namespace

ReductionTrace reduce_trace(const Numeration& nm, const Int& m, int tau, const ReductionOptions& opt) {
    const Schedule& s = nm.schedule();
    ReductionTrace tr;
    tr.m = m;
    tr.tau = tau;
    tr.Jm = nm.scale(m);
    if (!unb(s, tr.Jm)) throw PreconditionViolated("J(m) must be an unbounded scale");
    if (!unb(s, tau)) throw PreconditionViolated("tau must be an unbounded scale");
    if (tau >= tr.Jm) throw TargetTooCoarse("tau = " + std::to_string(tau) + " is not below J(m) = " + std::to_string(tr.Jm));
    int floor = opt.tau_floor >= 0 ? opt.tau_floor : default_tau_floor(s);
    if (tau < floor) throw TargetTooFine("tau = " + std::to_string(tau) + " below the floor " + std::to_string(floor));
    tr.I = s.index_of(tr.Jm) - s.index_of(tau);
    Builder b{nm, s, nm.tables(), tr};
    b.initial();
    for (int i = 1; i < tr.I; ++i) {
        if (tr.levels.back().entries.empty()) {
            ReductionLevel nx;
            nx.i = i + 1;
            nx.scale_prev = tr.levels.back().scale;
            nx.scale = static_cast<int>(s.lambda(nx.scale_prev));
            nx.a0 = tr.levels.back().a0;
            tr.levels.push_back(std::move(nx));
            continue;
        }
        b.step(i);
    }
    return tr;
}

bool TraceReport::structural_ok() const {
    for (auto& t : lines.lines)
        if (t.failures && t.lemma != "E3" && t.lemma != "E4-buddies") return false;
    return true;
}

std::string TraceReport::text() const {
    std::ostringstream os;
    os << lines.text();
    for (auto& n : notes) os << "note: " << n << "\n";
    for (size_t i = 0; i < e4_measure.size(); ++i)
        os << "E4 measure level " << i + 1 << ": " << to_string(e4_measure[i]) << "  ratio in ["
           << approx(e4_ratio[i].lower, 6) << ", " << approx(e4_ratio[i].upper, 6) << "]\n";
    return os.str();
}

namespace {

bool outside_lineage(const Space& sp, const Numeration& nm, const Word& x, const std::vector<Int>& lineage) {
    for (auto& n : lineage) {
        int b = nm.scale(n);
        if (b == 0) continue;
        if (sp.in_bad(x, b, n) == Membership::In) return false;
    }
    return true;
}

struct PartSample {
    long long sampled = 0, excluded = 0, buddies = 0, failures = 0;
    MeasureInterval mu_domain{0, 0};
    bool done = false;
};

}  // namespace

TraceReport verify_trace(const Measure& me, const Numeration& nm, const ReductionTrace& tr, long long samples, Rng& rng) {
    const Space& sp = me.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    TraceReport rep;
    for (const char* nmx : {"E1", "E2-partition", "E2-scales", "E3", "E4-buddies", "E4-comparable", "E5", "E6", "E7",
                            "ancestors", "A0-monotone", "time-bound", "final-half-at-tau"})
        rep.lines.line(nmx);
    auto& e1 = rep.lines.line("E1");
    auto& e2 = rep.lines.line("E2-partition");
    auto& e2s = rep.lines.line("E2-scales");
    auto& e3 = rep.lines.line("E3");
    auto& e4 = rep.lines.line("E4-buddies");
    auto& e4c = rep.lines.line("E4-comparable");
    auto& e5 = rep.lines.line("E5");
    auto& e6 = rep.lines.line("E6");
    auto& e7 = rep.lines.line("E7");
    auto& anc = rep.lines.line("ancestors");
    auto& mono = rep.lines.line("A0-monotone");
    auto& tbound = rep.lines.line("time-bound");
    auto& half = rep.lines.line("final-half-at-tau");
    const int K = sp.K();

    std::set<int> unb_scales;
    for (int n = 1; n <= s.count(); ++n) unb_scales.insert(static_cast<int>(s.a(n)));

    for (auto& L : tr.levels) {
        const int i = L.i;
        std::string lv = "level " + std::to_string(i);
        ++e1.tested;
        if (L.entries.size() % 2) e1.fail(lv);

        // partition: nu-additivity against the whole space and coverage
        ConstraintSet all = tr.A0(i);
        Rat sum = me.nu(tr.A0(i));
        for (auto& e : L.entries) {
            sum += me.nu(e.set);
            all.add(e.set);
        }
        ++e2.tested;
        if (sum != 1 || me.nu(all) != 1) e2.fail(lv + " nu sum " + str(sum));
        for (auto& e : L.entries) {
            ++e2s.tested;
            for (auto& [k, ds] : e.set.allowed)
                if (!unb_scales.count(k) || k > tr.Jm || k < L.scale_prev) e2s.fail(lv + " scale " + std::to_string(k));
        }
        for (int p : L.a0)
            for (auto& [k, ds] : tr.parts[p].set.allowed) {
                ++e2s.tested;
                if (!unb_scales.count(k) || k > tr.Jm) e2s.fail(lv + " A0 scale " + std::to_string(k));
            }

        // pairing
        for (size_t a = 1; a <= L.entries.size(); ++a) {
            const ReductionEntry& A = L.entries[a - 1];
            ++anc.tested;
            if (i == 1 ? A.ancestor != 0
                       : (A.ancestor < 1 || A.ancestor > static_cast<int>(tr.levels[i - 2].entries.size())))
                anc.fail(lv + " entry " + std::to_string(a));
            if (A.lineage.size() != static_cast<size_t>(i + 1) || A.lineage.front() != A.n || A.lineage.back() != tr.m)
                anc.fail(lv + " lineage " + std::to_string(a));
            ++tbound.tested;
            int Jn = nm.scale(A.n);
            if (4 * iabs(A.n) > 3 * tb.p[std::min(Jn + 1, tb.K + 1)]) tbound.fail(lv + " n=" + A.n.str());
            size_t b = static_cast<size_t>(A.pair);
            if (b < 1 || b > L.entries.size() || L.entries[b - 1].pair != static_cast<int>(a) || b == a) {
                e5.fail(lv + " entry " + std::to_string(a) + " unpaired");
                continue;
            }
            if (b < a) continue;
            const ReductionEntry& B = L.entries[b - 1];
            int ja = nm.scale(A.n), jb = nm.scale(B.n);
            ++e5.tested;
            if (ja != L.scale && jb != L.scale) e5.fail(lv + " pair " + std::to_string(a) + "," + std::to_string(b));
            if ((ja == L.scale) != (jb == L.scale)) {
                ++e6.tested;
                const ReductionEntry& top = ja == L.scale ? A : B;
                const ReductionEntry& low = ja == L.scale ? B : A;
                const Int& q = tb.q[L.scale_prev];
                Int diff = top.n - low.n;
                bool ok = q != 0 && floor_mod(diff, q) == 0 && 2 * iabs(Int(diff / q)) <= s.c(L.scale_prev) + 1;
                if (!ok) e6.fail(lv + " pair " + std::to_string(a) + "," + std::to_string(b));
            }
            ++e7.tested;
            std::vector<int> diffs;
            std::set<int> keys;
            for (auto& [k, ds] : A.set.allowed) keys.insert(k);
            for (auto& [k, ds] : B.set.allowed) keys.insert(k);
            for (int k : keys) {
                auto ia = A.set.allowed.find(k), ib = B.set.allowed.find(k);
                if (ia == A.set.allowed.end() || ib == B.set.allowed.end() || !(ia->second == ib->second))
                    diffs.push_back(k);
            }
            bool ok7 = diffs.size() <= 1;
            if (ok7 && diffs.size() == 1) {
                int k = diffs[0];
                auto ta = A.tags.find(k), tb2 = B.tags.find(k);
                ok7 = ta != A.tags.end() && tb2 != B.tags.end() && ta->second.sign == tb2->second.sign &&
                      ta->second.e == tb2->second.e && ((ta->second.side == 'L' && tb2->second.side == 'R') ||
                                                        (ta->second.side == 'R' && tb2->second.side == 'L'));
                if (ok7) {
                    const ReductionEntry& l = ta->second.side == 'L' ? A : B;
                    const ReductionEntry& r = ta->second.side == 'L' ? B : A;
                    ok7 = subset(l.set.allowed.at(k), s_window(s, ta->second.sign, ta->second.e, k, 'L')) &&
                          subset(r.set.allowed.at(k), s_window(s, ta->second.sign, ta->second.e, k, 'R'));
                }
            }
            if (!ok7) e7.fail(lv + " pair " + std::to_string(a) + "," + std::to_string(b));
        }
        if (i > 1) {
            ++mono.tested;
            if (me.nu(tr.A0(i - 1).minus(tr.A0(i))) != 0) mono.fail(lv);
        }

        // E3 by direct orbits
        if (!L.entries.empty()) {
            long long per = std::max<long long>(1, samples / static_cast<long long>(L.entries.size()));
            for (auto& en : L.entries) {
                ConstraintSet cs;
                cs.add(en.set);
                if (me.nu_surviving(cs, K) == 0) continue;
                for (long long n = 0; n < per; ++n) {
                    Word x = sample_in(me, cs, rng);
                    if (!outside_lineage(sp, nm, x, en.lineage)) {
                        ++e3.skipped;
                        continue;
                    }
                    ++e3.tested;
                    if (!agree(sp.T(x, tr.m).y, sp.T(x, en.n).y, L.scale_prev - 1))
                        e3.fail(lv + " n=" + en.n.str() + " x=" + x.str());
                }
            }
        }
    }
    if (!tr.levels.empty()) {
        auto& last = tr.levels.back();
        if (!last.entries.empty()) {
            ++half.tested;
            long long at = 0;
            for (auto& e : last.entries) at += nm.scale(e.n) == tr.tau;
            if (2 * at < static_cast<long long>(last.entries.size())) half.fail(std::to_string(at) + " of " + std::to_string(last.entries.size()));
        }
    }

    // E4: sample each part once through its construction
    std::vector<PartSample> ps(tr.parts.size());
    long long per_part = std::max<long long>(1, samples / std::max<long long>(1, static_cast<long long>(tr.parts.size())));
    for (size_t p = 0; p < tr.parts.size(); ++p) {
        const A0Part& part = tr.parts[p];
        PartSample& o = ps[p];
        o.done = true;
        if (part.source == FriendSource::Paired) {
            const A0Part& q = tr.parts[static_cast<size_t>(part.partner)];
            MeasureInterval a = me.mu_interval(part.set), b = me.mu_interval(q.set);
            ++e4c.tested;
            if (b.lower > 0 && a.lower > 0 && !(2 * a.upper > b.lower && a.lower < 2 * b.upper))
                e4c.fail(part.why + " ratio outside (1/2, 2)");
            continue;
        }
        if (part.source == FriendSource::None) continue;
        PhiMap phi;
        try {
            switch (part.source) {
                case FriendSource::Bounded: phi = phi_bounded(sp, nm, part.source_r); break;
                case FriendSource::Small: phi = phi_small(sp, nm, part.source_r); break;
                default: {
                    long long e = nm.lst(part.source_r);
                    phi = (e > -10 && e < 10) ? phi_small_e(sp, nm, part.source_r) : phi_boundary(sp, nm, part.source_r);
                }
            }
        } catch (const Error& err) {
            ++e4.skipped;
            rep.notes.push_back("part " + std::to_string(p) + ": " + err.what());
            continue;
        }
        ConstraintSet dom;
        dom.add(part.set);
        dom = dom.intersect(phi.B);
        if (part.side) {
            ConstraintSet w;
            w.add(*part.side);
            dom = dom.intersect(w);
        }
        o.mu_domain = me.mu_interval(dom);
        if (me.nu_surviving(dom, K) == 0) {
            ++e4.skipped;
            rep.notes.push_back("part " + std::to_string(p) + ": construction domain is empty");
            continue;
        }
        for (long long n = 0; n < per_part; ++n) {
            Word x = sample_in(me, dom, rng);
            ++o.sampled;
            Word pp = phi.partner(x);
            if (sp.in_X(pp) != Membership::In || sp.in_bad(x, phi.bad_scale, phi.bad_time) == Membership::In ||
                (phi.screen_partner && sp.in_bad(pp, phi.bad_scale, phi.bad_time) == Membership::In) ||
                !outside_lineage(sp, nm, x, part.lineage) || !outside_lineage(sp, nm, pp, part.lineage)) {
                ++o.excluded;
                ++e4.skipped;
                continue;
            }
            auto [y, z] = phi.pair(x);
            ++e4.tested;
            PairResult b = is_buddy(sp, y, z, tr.m, phi.pair_scale);
            if (b.m == Membership::In)
                ++o.buddies;
            else {
                ++o.failures;
                e4.fail(part.why + " " + to_string(part.source) + " r=" + part.source_r.str() + " clause " + b.clause +
                        " z=" + z.str());
            }
        }
    }
    for (auto& L : tr.levels) {
        Rat flo = 0, fhi = 0;
        for (int p : L.a0) {
            const PartSample& o = ps[static_cast<size_t>(p)];
            if (o.sampled == 0) continue;
            Wilson w = wilson(o.buddies, o.sampled);
            flo += o.mu_domain.lower * Rat(static_cast<long long>(w.lo * 1e12), 1000000000000LL);
            fhi += o.mu_domain.upper;
        }
        MeasureInterval a0 = me.mu_interval(tr.A0(L.i));
        MeasureInterval ratio{0, 1};
        if (a0.upper > 0) ratio.lower = flo / a0.upper;
        if (a0.lower > 0) ratio.upper = std::min(Rat(1), Rat(fhi / a0.lower));
        Rat floor(1, 1000000000);
        Verdict v = Verdict::Inconclusive;
        if (a0.upper == 0)
            v = Verdict::Pass;  // empty A_0: vacuous
        else if (ratio.lower > floor)
            v = Verdict::Pass;
        else if (ratio.upper < floor)
            v = Verdict::Fail;
        rep.e4_measure.push_back(v);
        rep.e4_ratio.push_back(ratio);
    }
    return rep;
}

ReductionTrace corrupt_pairing(const ReductionTrace& tr) {
    ReductionTrace out = tr;
    for (auto& L : out.levels) {
        if (L.entries.size() < 4) continue;
        int a = 1, b = L.entries[0].pair;
        int c = 0;
        for (int x = 1; x <= static_cast<int>(L.entries.size()); ++x)
            if (x != a && x != b) {
                c = x;
                break;
            }
        int d = L.entries[c - 1].pair;
        L.entries[a - 1].pair = c;
        L.entries[c - 1].pair = a;
        L.entries[b - 1].pair = d;
        L.entries[d - 1].pair = b;
        return out;
    }
    throw PreconditionViolated("no level holds two pairs");
}

bool MultiplesReport::ok() const {
    if (!lemma.ok()) return false;
    for (auto& l : levels)
        if (l.branches.count("violated")) return false;
    return true;
}

std::string MultiplesReport::text() const {
    std::ostringstream os;
    os << "m=" << m << " s=" << s << "\n";
    for (auto& l : levels) {
        os << "level " << l.i << ": compared=" << l.compared << " equal=" << l.equal << " diverged=" << l.diverged
           << " only_m=" << l.only_m << " only_sm=" << l.only_sm;
        for (auto& [k, v] : l.branches) os << " " << k << "=" << v;
        os << "\n";
    }
    os << lemma.text();
    os << "mu(A0) for m in [" << approx(a0_m.lower, 6) << ", " << approx(a0_m.upper, 6) << "], for s*m in ["
       << approx(a0_sm.lower, 6) << ", " << approx(a0_sm.upper, 6) << "]\n";
    return os.str();
}

MultiplesReport verify_multiples(const Measure& me, const Numeration& nm, const Int& m, int tau, long long s,
                                 const ReductionOptions& opt) {
    const Schedule& sc = nm.schedule();
    int J = nm.scale(m);
    if (!unb(sc, J)) throw PreconditionViolated("J(m) must be unbounded");
    long long bound = multiplier_bound(nm, m);
    if (s == 0 || std::llabs(s) > bound) throw PreconditionViolated("|s| must lie in [1, " + std::to_string(bound) + "]");
    Int sm = Int(s) * m;
    if (!unb(sc, nm.scale(sm))) throw PreconditionViolated("J(s m) must be unbounded");
    MultiplesReport rep;
    rep.m = m;
    rep.s = s;
    rep.tm = reduce_trace(nm, m, tau, opt);
    rep.tsm = reduce_trace(nm, sm, tau, opt);
    size_t nl = std::max(rep.tm.levels.size(), rep.tsm.levels.size());
    for (size_t li = 0; li < nl; ++li) {
        MultipleLevel ml;
        ml.i = static_cast<int>(li) + 1;
        std::map<std::string, Int> a, b;
        if (li < rep.tm.levels.size())
            for (auto& e : rep.tm.levels[li].entries) a[e.path] = e.n;
        if (li < rep.tsm.levels.size())
            for (auto& e : rep.tsm.levels[li].entries) b[e.path] = e.n;
        for (auto& [p, n] : a) {
            auto it = b.find(p);
            if (it == b.end()) {
                ++ml.only_m;
                continue;
            }
            ++ml.compared;
            if (it->second == Int(s) * n)
                ++ml.equal;
            else
                ++ml.diverged;
        }
        for (auto& [p, n] : b)
            if (!a.count(p)) ++ml.only_sm;
        // trichotomy on the times of m's trace that get reduced at this level
        // (the times whose reductions produce this level)
        if (li < rep.tm.levels.size()) {
            std::vector<Int> times;
            if (li == 0)
                times.push_back(m);
            else
                for (auto& e : rep.tm.levels[li - 1].entries)
                    if (e.reducible) times.push_back(e.n);
            for (auto& n : times) {
                Int kn = Int(s) * n;
                if (!unb(sc, nm.scale(kn))) {
                    ++ml.branches["skip: s*n bounded"];
                    continue;
                }
                check_reduc_multiply(nm, n, s, rep.lemma);
                int Jn = nm.scale(n);
                const Int& pJ = nm.tables().p[Jn];
                auto small = [&](const Int& x) { return nm.scale(x) == Jn && 4 * iabs(x) < 3 * pJ; };
                Int Rn = nm.R(n), Rk = nm.R(kn), Ln = nm.L(n), Lk = nm.L(kn);
                if (unb(sc, nm.scale(Rn))) {
                    std::string br = Rk == Int(s) * Rn          ? "R: equal"
                                     : !unb(sc, nm.scale(Rk))   ? "R: bounded"
                                     : (small(Rn) || small(Rk)) ? "R: small"
                                                                : "violated";
                    ++ml.branches[br];
                }
                if (unb(sc, nm.scale(Ln))) {
                    std::string br = Lk == Int(s) * Ln ? "L: equal" : !unb(sc, nm.scale(Lk)) ? "L: bounded" : "violated";
                    ++ml.branches[br];
                }
            }
        }
        rep.levels.push_back(ml);
    }
    rep.a0_m = me.mu_interval(rep.tm.A0(static_cast<int>(rep.tm.levels.size())));
    rep.a0_sm = me.mu_interval(rep.tsm.A0(static_cast<int>(rep.tsm.levels.size())));
    return rep;
}

}  // namespace rank1lab
