#include "rank1lab/joining.hpp"

#include "rank1lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace rank1lab {

namespace {

Rat rat_down(double v) { return Rat(static_cast<long long>(std::floor(v * 1e12)), 1000000000000LL); }
Rat rat_up(double v) { return Rat(static_cast<long long>(std::ceil(v * 1e12)), 1000000000000LL); }

MeasureInterval bracket(long long hits, long long n) {
    if (n == 0) return {0, 1};
    Wilson w = wilson(hits, n);
    return {std::max(Rat(0), rat_down(w.lo)), std::min(Rat(1), rat_up(w.hi))};
}

Verdict sampled(long long tested, long long failures) {
    if (failures) return Verdict::Fail;
    return tested ? Verdict::Pass : Verdict::Inconclusive;
}

// upper <= bound: pass, lower > bound: fail
Verdict at_most(const MeasureInterval& v, const Rat& bound, bool strict = false) {
    if (strict ? v.upper < bound : v.upper <= bound) return Verdict::Pass;
    if (strict ? v.lower >= bound : v.lower > bound) return Verdict::Fail;
    return Verdict::Inconclusive;
}

Verdict at_least(const MeasureInterval& v, const Rat& bound) {
    if (v.lower >= bound) return Verdict::Pass;
    if (v.upper < bound) return Verdict::Fail;
    return Verdict::Inconclusive;
}

Verdict both(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
    if (a == Verdict::Pass && b == Verdict::Pass) return Verdict::Pass;
    return Verdict::Inconclusive;
}

Rat metric(const Word& x, const Word& y) {
    int j = first_difference(x, y);
    return j == 0 ? Rat(0) : Rat(1, Int(1) << j);
}

Int uniform_in(Rng& rng, const Int& lo, const Int& hi) {  // inclusive, hi - lo < 2^128
    Int span = hi - lo + 1;
    Int r = (Int(rng.next()) << 64) + Int(rng.next());
    return lo + r % span;
}

Prefix prefix(const Word& w, int D) { return Prefix(w.x.begin(), w.x.begin() + D); }

std::string join_digits(const Prefix& p) {
    std::string s;
    for (size_t i = 0; i < p.size(); ++i) {
        if (i) s += ':';
        s += std::to_string(p[i]);
    }
    return s;
}

Prefix split_digits(const std::string& s) {
    Prefix p;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ':')) p.push_back(std::stoll(t));
    return p;
}

void add_line(std::vector<PJLine>& v, std::string name, Verdict verdict, long long tested, long long failures,
              std::string detail) {
    v.push_back({std::move(name), verdict, tested, failures, std::move(detail)});
}

std::string lines_text(const std::vector<PJLine>& v) {
    std::ostringstream os;
    for (auto& l : v)
        os << std::left << std::setw(14) << l.name << std::setw(13) << to_string(l.verdict) << " tested=" << l.tested
           << " failures=" << l.failures << (l.detail.empty() ? "" : "  " + l.detail) << "\n";
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- times

JoiningTimes joining_times(const PQSeq& pq, int kmax) {
    if (kmax + 1 > static_cast<int>(pq.P.size())) throw ScaleOverflow("heights missing for k = " + std::to_string(kmax));
    JoiningTimes jt;
    jt.alpha.assign(kmax + 1, Int(0));
    jt.gamma.assign(kmax + 1, Int(0));
    jt.alpha[0] = 1;
    for (int k = 0; k < kmax; ++k) {
        jt.alpha[k + 1] = pq.P[k + 1] + jt.gamma[k];
        jt.gamma[k + 1] = jt.alpha[k] - pq.P[k + 1];
    }
    return jt;
}

JoiningTimes joining_times(const Schedule& s, int kmax) { return joining_times(unbounded_heights(s, kmax), kmax); }

int check_joining_relations(const PQSeq& pq, const JoiningTimes& jt, int kmax) {
    for (int k = 1; k <= kmax; ++k) {
        if (jt.alpha[k] + pq.Q[k] != jt.alpha[k - 1] + pq.P[k]) return k;
        if (jt.gamma[k] + pq.P[k] != pq.Q[k] + jt.gamma[k - 1]) return k;
    }
    return 0;
}

namespace {

PQSeq table_heights(const Tables& tb) {
    int n = tb.max_unbounded();
    PQSeq pq;
    pq.P.assign(n + 1, Int(0));
    pq.Q.assign(n + 1, Int(0));
    for (int j = 1; j <= n; ++j) {
        pq.P[j] = tb.P(j);
        pq.Q[j] = tb.Q(j);
    }
    return pq;
}

}  // namespace

// ---------------------------------------------------------------- tower sets

const char* to_string(TowerClass c) {
    switch (c) {
        case TowerClass::U: return "U";
        case TowerClass::A: return "A";
        default: return "B";
    }
}

TowerSets tower_sets(const Space& sp, int k) {
    const Schedule& s = sp.schedule();
    if (!s.finite()) throw ScheduleTooLarge("tower sets need a finite desk schedule");
    if (k < 1 || k > s.count() || s.a(k) >= sp.K())
        throw NotUnboundedScale("k = " + std::to_string(k) + " is not a materialized unbounded index below K");
    const Tables& tb = sp.tables();
    TowerSets t;
    t.k = k;
    t.a = s.a(k);
    t.d = s.d(k);
    t.P = tb.P(k);
    t.Q = tb.Q(k);
    Int base = Int(t.d + 1) * (2 * t.P - t.Q);
    t.v_time = base - 1;
    t.return_bound = base - 3;
    t.span = Int(t.d + 1) * t.P;
    t.u0 = DigitSet::of({0, 1});
    t.u0.add(5, 9).add(t.d - 1, t.d + 2).add(2 * t.d, 2 * t.d + 1);
    return t;
}

bool TowerSets::in_V(const Space& sp, const Word& x) const {
    return sp.in_bad(x, static_cast<int>(a), v_time) == Membership::In;
}

bool TowerSets::in_J(const Space& sp, const Word& x) const {
    for (int i = 1; i <= a; ++i)
        if (x(i) != 0) return false;
    return !in_V(sp, x);
}

TowerClass TowerSets::classify(const Space& sp, const Word& x) const {
    if (u0.contains(x(static_cast<int>(a))) || in_V(sp, x)) return TowerClass::U;
    // x = T^n y with y in the base puts x at S|Y_a-rank n or n+1
    Int rho = sp.rank(x, static_cast<int>(a));
    for (Int n : {rho, Int(rho - 1)}) {
        if (n < 0 || n >= span) continue;
        if (in_J(sp, sp.T(x, -n).y)) return TowerClass::A;
    }
    return TowerClass::B;
}

Int TowerSets::first_return(const Space& sp, const Word& x) const {
    const Tables& tb = sp.tables();
    const int K = sp.K();
    const Int& ta = tb.t[a];
    Int M = tb.t[K] / ta;
    Int u = sp.value(x, K) / ta;
    Int rx = sp.rank(x, K);
    const Int& N = tb.N(K);
    for (Int step = 1; step <= M; ++step) {
        Int v = (u + step) % M;
        Word y = sp.from_value(v * ta, K);
        if (!sp.survives(y, K) || in_V(sp, y)) continue;
        Int n = floor_mod(sp.rank(y, K) - rx, N);
        return n == 0 ? N : n;
    }
    return N;
}

// ---------------------------------------------------------------- PJ report

const PJLine& PJReport::line(const std::string& n) const {
    for (auto& l : lines)
        if (l.name == n) return l;
    throw PreconditionViolated("no line " + n);
}

bool PJReport::ok() const {
    for (auto& l : lines)
        if (l.verdict == Verdict::Fail) return false;
    return true;
}

std::string PJReport::text() const {
    std::ostringstream os;
    os << "k=" << k << " a(k)=" << sets.a << " d(k)=" << sets.d << " P=" << sets.P << " Q=" << sets.Q << "\n";
    os << "samples=" << sampled << " A=" << in_A << " B=" << in_B << " U=" << in_U << " (V=" << in_V << ")\n";
    os << "mu(U0)=" << approx(mu_U0.lower, 6) << " mu(A) in [" << approx(mu_A.lower, 4) << ", " << approx(mu_A.upper, 4)
       << "] mu(B) in [" << approx(mu_B.lower, 4) << ", " << approx(mu_B.upper, 4) << "]\n";
    os << lines_text(lines);
    return os.str();
}

PJReport joining_prep(const Measure& me, int k, Rng& rng, const PJOptions& opt) {
    const Space& sp = me.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    const int K = sp.K();
    PJReport rep;
    rep.k = k;
    rep.sets = tower_sets(sp, k);
    if (opt.u0) rep.sets.u0 = *opt.u0;
    const TowerSets& ts = rep.sets;
    const int a = static_cast<int>(ts.a);
    MeasureInterval nuX = me.nu_X(K);

    // classification and the agreement contracts
    long long pj3t = 0, pj3f = 0, pj4t = 0, pj4f = 0, pj5t = 0, pj5f = 0, pj6t = 0, pj6f = 0;
    std::string w3, w4, w5, w6;
    Int twoP = 2 * ts.P, wideB = 2 * ts.P - 2 * ts.Q;
    for (long long n = 0; n < opt.samples; ++n) {
        Word x = sp.sample_X(rng);
        ++rep.sampled;
        bool v = ts.in_V(sp, x);
        rep.in_V += v;
        TowerClass c = ts.classify(sp, x);
        if (c == TowerClass::U) {
            ++rep.in_U;
            continue;
        }
        bool isA = c == TowerClass::A;
        (isA ? rep.in_A : rep.in_B) += 1;
        const Int& lim = isA ? twoP : wideB;
        std::vector<Int> times{lim, Int(-lim), lim / 2, Int(-lim / 2)};
        for (long long t = 4; t < opt.times_per_point; ++t) times.push_back(uniform_in(rng, -lim, lim));
        for (auto& r : times) {
            bool eq = sp.T(x, r).y == sp.induced(x, a, r).y;
            if (isA) {
                ++pj3t;
                if (!eq && pj3f++ == 0) w3 = "x=" + x.str() + " n=" + r.str();
            } else {
                ++pj5t;
                if (!eq && pj5f++ == 0) w5 = "x=" + x.str() + " n=" + r.str();
            }
        }
        Word y = sp.induced(x, a, isA ? ts.P : Int(ts.P - ts.Q)).y;
        bool ag = agree(y, x, a - 1);
        if (isA) {
            ++pj4t;
            if (!ag && pj4f++ == 0) w4 = "x=" + x.str();
        } else {
            ++pj6t;
            if (!ag && pj6f++ == 0) w6 = "x=" + x.str();
        }
    }

    // PJ1 on the base
    long long pj1t = 0, pj1f = 0, jtries = 0, jhits = 0;
    std::string w1;
    Word base(std::vector<long long>(a, 0));
    while (pj1t < opt.j_samples && jtries < 20 * opt.j_samples) {
        ++jtries;
        Word x = sp.sample_cylinder(rng, base);
        if (ts.in_V(sp, x)) continue;
        ++jhits;
        Int n = ts.first_return(sp, x);
        if (pj1t == 0 || n < rep.min_return) rep.min_return = n;
        ++pj1t;
        if (n < ts.return_bound && pj1f++ == 0) w1 = "x=" + x.str() + " return=" + n.str();
    }
    add_line(rep.lines, "PJ1", sampled(pj1t, pj1f), pj1t, pj1f,
             w1.empty() ? "min return " + rep.min_return.str() + " >= " + ts.return_bound.str() : w1);

    // PJ2: J(j) inside [0^a(j)], tail over the materialized indices
    {
        Rat tail = 0, bound = 0;
        for (int j = k + 1; j <= s.count() && s.a(j) <= K; ++j) {
            Constraint z;
            for (int i = 1; i <= s.a(j); ++i) z.allowed[i] = DigitSet::of({0});
            tail += me.mu_interval(z).upper;
            bound += Rat(1, pow10(static_cast<unsigned long>(s.a(j) - ts.a)));
        }
        Rat lhs = Rat(ts.span) * tail;
        Rat rhs = bound / nuX.lower;
        bool span_ok = ts.span <= tb.t[a];
        Verdict v = span_ok && lhs <= rhs ? Verdict::Pass : Verdict::Fail;
        add_line(rep.lines, "PJ2", v, 1, v == Verdict::Fail, "(d+1)P * tail <= " + approx(lhs, 4) + " vs " + approx(rhs, 4));
    }

    add_line(rep.lines, "PJ3", sampled(pj3t, pj3f), pj3t, pj3f, w3);
    add_line(rep.lines, "PJ4", sampled(pj4t, pj4f), pj4t, pj4f, w4);
    add_line(rep.lines, "PJ5", sampled(pj5t, pj5f), pj5t, pj5f, w5);
    add_line(rep.lines, "PJ6", sampled(pj6t, pj6f), pj6t, pj6f, w6);

    // PJ7 and the U_0 size estimate
    rep.mu_U0 = me.mu_interval(ConstraintSet::digit(a, ts.u0));
    rep.mu_V = bracket(rep.in_V, rep.sampled);
    {
        Rat bound = Rat(13, ts.d) / nuX.upper;
        Verdict v = rep.mu_U0.upper <= bound ? Verdict::Pass : Verdict::Fail;
        add_line(rep.lines, "U0-size", v, 1, v == Verdict::Fail,
                 "mu(U0) = " + approx(rep.mu_U0.upper, 6) + " vs 13/(d nu(X)) = " + approx(bound, 6));
        MeasureInterval U{std::max(rep.mu_U0.lower, rep.mu_V.lower), std::min(Rat(1), Rat(rep.mu_U0.upper + rep.mu_V.upper))};
        Rat eps = Rat(15, Int(1) << k);
        add_line(rep.lines, "PJ7", at_most(U, eps), rep.sampled, 0,
                 "mu(U) in [" + approx(U.lower, 4) + ", " + approx(U.upper, 4) + "] vs " + approx(eps, 4));
    }
    rep.mu_A = bracket(rep.in_A, rep.sampled);
    rep.mu_B = bracket(rep.in_B, rep.sampled);
    add_line(rep.lines, "PJ8", both(at_least(rep.mu_A, opt.c), at_least(rep.mu_B, opt.c)), rep.sampled, 0,
             "c = " + approx(opt.c, 4));
    return rep;
}

// ---------------------------------------------------------------- empirical joinings

std::pair<std::map<Prefix, Rat>, std::map<Prefix, Rat>> EmpiricalJoining::marginals() const {
    std::map<Prefix, Rat> m1, m2;
    for (auto& [c, w] : atoms) {
        m1[c.first] += w;
        m2[c.second] += w;
    }
    return {m1, m2};
}

Rat EmpiricalJoining::total() const {
    Rat t = 0;
    for (auto& [c, w] : atoms) t += w;
    return t;
}

std::string EmpiricalJoining::csv() const {
    std::ostringstream os;
    os << "x,y,weight\n";
    for (auto& [c, w] : atoms) os << join_digits(c.first) << "," << join_digits(c.second) << "," << str(w) << "\n";
    return os.str();
}

EmpiricalJoining EmpiricalJoining::from_csv(const std::string& text) {
    EmpiricalJoining e;
    std::stringstream ss(text);
    std::string line;
    std::getline(ss, line);
    if (line != "x,y,weight") throw ConfigError("joining csv: bad header");
    e.depth = -1;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto p1 = line.find(','), p2 = line.rfind(',');
        if (p1 == std::string::npos || p1 == p2) throw ConfigError("joining csv: bad row " + line);
        Cell c{split_digits(line.substr(0, p1)), split_digits(line.substr(p1 + 1, p2 - p1 - 1))};
        int D = static_cast<int>(c.first.size());
        if (static_cast<int>(c.second.size()) != D || (e.depth >= 0 && e.depth != D))
            throw DepthMismatch("joining csv: rows of different depth");
        e.depth = D;
        e.atoms[c] += Rat(line.substr(p2 + 1));
    }
    if (e.depth < 0) e.depth = 0;
    return e;
}

EmpiricalJoining empirical_joining(const Space& sp, const Int& r, long long samples, int depth, Rng& rng) {
    if (depth < 1 || depth > sp.K()) throw PreconditionViolated("depth must lie in [1, K]");
    EmpiricalJoining e;
    e.depth = depth;
    std::map<Cell, long long> counts;
    long long attempts = 0;
    while (e.samples < samples && attempts < 10 * samples + 10) {
        ++attempts;
        try {
            Word x = sp.sample_X(rng);
            Word y = sp.T(x, r).y;
            ++counts[{prefix(x, depth), prefix(y, depth)}];
            ++e.samples;
        } catch (const InsufficientPrecision&) {
            ++e.rejected;
        }
    }
    for (auto& [c, n] : counts) e.atoms[c] = Rat(n, e.samples);
    return e;
}

EmpiricalJoining point_mass(const Prefix& x, const Prefix& y) {
    if (x.size() != y.size()) throw DepthMismatch("point mass: coordinates of different depth");
    EmpiricalJoining e;
    e.depth = static_cast<int>(x.size());
    e.atoms[{x, y}] = 1;
    e.samples = 1;
    return e;
}

EmpiricalJoining mixture(const EmpiricalJoining& a, const EmpiricalJoining& b, const Rat& wa) {
    if (a.depth != b.depth) throw DepthMismatch("mixture of joinings at depths " + std::to_string(a.depth) + " and " +
                                                std::to_string(b.depth));
    EmpiricalJoining e;
    e.depth = a.depth;
    e.samples = a.samples + b.samples;
    for (auto& [c, w] : a.atoms) e.atoms[c] += wa * w;
    for (auto& [c, w] : b.atoms) e.atoms[c] += (1 - wa) * w;
    return e;
}

EmpiricalJoining product_of_marginals(const EmpiricalJoining& e) {
    auto [m1, m2] = e.marginals();
    EmpiricalJoining p;
    p.depth = e.depth;
    for (auto& [u, wu] : m1)
        for (auto& [v, wv] : m2) p.atoms[{u, v}] = wu * wv;
    return p;
}

Rat kr_edge(int j, int D) { return j < D ? Rat(1, Int(1) << (j + 2)) : Rat(1, Int(1) << (D + 1)); }

namespace {

Cell truncate(const Cell& c, int j) {
    return {Prefix(c.first.begin(), c.first.begin() + j), Prefix(c.second.begin(), c.second.begin() + j)};
}

}  // namespace

Rat kr_distance(const EmpiricalJoining& a, const EmpiricalJoining& b) {
    if (a.depth != b.depth)
        throw DepthMismatch("KR distance between depths " + std::to_string(a.depth) + " and " + std::to_string(b.depth));
    const int D = a.depth;
    Rat out = 0;
    for (int j = 1; j <= D; ++j) {
        std::map<Cell, Rat> diff;
        for (auto& [c, w] : a.atoms) diff[truncate(c, j)] += w;
        for (auto& [c, w] : b.atoms) diff[truncate(c, j)] -= w;
        Rat s = 0;
        for (auto& [c, w] : diff) s += abs(w);
        out += kr_edge(j, D) * s;
    }
    return out;
}

Rat kr_to_product(const EmpiricalJoining& e) {
    const int D = e.depth;
    Rat out = 0;
    for (int j = 1; j <= D; ++j) {
        std::map<Cell, Rat> cells;
        std::map<Prefix, Rat> m1, m2;
        for (auto& [c, w] : e.atoms) {
            Cell t = truncate(c, j);
            cells[t] += w;
            m1[t.first] += w;
            m2[t.second] += w;
        }
        // sum over all cells of |E - m1 m2|; cells outside the support contribute m1 m2, which sums to 1 overall
        Rat s = 1;
        for (auto& [c, w] : cells) {
            Rat p = m1[c.first] * m2[c.second];
            s += abs(w - p) - p;
        }
        out += kr_edge(j, D) * s;
    }
    return out;
}

// ---------------------------------------------------------------- hypotheses of the construction

std::string CEReport::text() const {
    std::ostringstream os;
    os << "k in [" << k_lo << ", " << k_hi << "]\n" << lines_text(lines);
    return os.str();
}

bool CEReport::ok() const {
    for (auto& l : lines)
        if (l.verdict == Verdict::Fail) return false;
    return true;
}

CEReport check_prop_ce_hypotheses(const Measure& me, int k_lo, int k_hi, Rng& rng, const CEOptions& opt) {
    const Space& sp = me.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    CEReport rep;
    rep.k_lo = k_lo;
    rep.k_hi = k_hi;
    PQSeq pq = table_heights(tb);
    int kmax = static_cast<int>(pq.P.size()) - 1;
    JoiningTimes jt = joining_times(pq, kmax);
    auto eps = [](int k) { return Rat(15, Int(1) << k); };
    auto rk = [&](int k) { return Int(Int(s.d(k) + 1) * pq.P[k] - 1); };

    for (int k = k_lo; k <= k_hi; ++k) {
        std::string K = "(k=" + std::to_string(k) + ")";
        PJReport pj = joining_prep(me, k, rng, opt.pj);
        const TowerSets& ts = pj.sets;
        add_line(rep.lines, "J1", pj.line("PJ8").verdict, pj.sampled, 0, K + " " + pj.line("PJ8").detail);

        Int r = rk(k);
        bool arith = 3 * Int(ts.d + 1) * ts.P <= 4 * Int(ts.d + 1) * (ts.P - ts.Q) && 2 * ts.return_bound >= 3 * r;
        Verdict j2 = !arith ? Verdict::Fail : pj.line("PJ1").verdict;
        if (pj.line("PJ1").tested && 2 * pj.min_return < 3 * r) j2 = Verdict::Fail;
        add_line(rep.lines, "J2", j2, pj.line("PJ1").tested, j2 == Verdict::Fail,
                 K + " 3/2 r(k) = " + Rat(3 * r, 2).str() + ", min return " + pj.min_return.str());

        add_line(rep.lines, "J3", pj.line("PJ7").verdict, pj.sampled, 0, K + " " + pj.line("PJ7").detail);
        add_line(rep.lines, "J4", pj.line("PJ2").verdict, 1, pj.line("PJ2").failures, K + " " + pj.line("PJ2").detail);
        Verdict j5 = eps(k + 1) <= eps(k) ? Verdict::Pass : Verdict::Fail;
        add_line(rep.lines, "J5", j5, 1, j5 == Verdict::Fail, K + " eps = 15 2^-k, sum 15");

        // J6 by orbits, with the coordinate agreement the times are built for
        long long t6 = 0, f6 = 0, ta = 0, fa = 0;
        std::string w6;
        for (long long n = 0; n < opt.samples; ++n) {
            Word x = sp.sample_X(rng);
            TowerClass c = ts.classify(sp, x);
            if (c == TowerClass::U) continue;
            std::pair<Int, Int> p1, p2;
            if (c == TowerClass::A) {
                p1 = {jt.alpha[k], jt.gamma[k - 1]};
                p2 = {jt.gamma[k], jt.alpha[k - 1]};
            } else {
                p1 = {jt.alpha[k], jt.alpha[k - 1]};
                p2 = {jt.gamma[k], jt.gamma[k - 1]};
            }
            for (auto& [u, v] : {p1, p2}) {
                Word yu = sp.T(x, u).y, yv = sp.T(x, v).y;
                ++t6;
                if (!(metric(yu, yv) < eps(k)) && f6++ == 0) w6 = "x=" + x.str();
                ++ta;
                if (!agree(yu, yv, static_cast<int>(ts.a) - 1)) ++fa;
            }
        }
        add_line(rep.lines, "J6", sampled(t6, f6), t6, f6, K + " " + w6);
        add_line(rep.lines, "J6-agree", sampled(ta, fa), ta, fa, K + " T^alpha(k) and its partner agree to a(k)-1");

        // J7: orbit averages sampled along i in [1, L]
        if (k + 1 > kmax) {
            add_line(rep.lines, "J7", Verdict::Inconclusive, 0, 0, K + " r(k+1) not materialized");
            continue;
        }
        Rat L = eps(k) * Rat(rk(k + 1)) / 9;
        Int Lint = Int(numerator(L) / denominator(L)) + 1;
        for (int which = 0; which < 2; ++which) {
            const Int& t = which == 0 ? jt.alpha[k] : jt.gamma[k];
            EmpiricalJoining nu = empirical_joining(sp, t, opt.kr_samples, opt.depth, rng);
            EmpiricalJoining nu2 = empirical_joining(sp, t, opt.kr_samples, opt.depth, rng);
            Rat noise = kr_distance(nu, nu2);
            Word x = sp.sample_X(rng);
            std::map<Cell, long long> cnt;
            for (long long n = 0; n < opt.kr_samples; ++n) {
                Int i = uniform_in(rng, Int(1), Lint);
                Word a = sp.T(x, i).y, b = sp.T(x, i + t).y;
                ++cnt[{prefix(a, opt.depth), prefix(b, opt.depth)}];
            }
            EmpiricalJoining orb;
            orb.depth = opt.depth;
            orb.samples = opt.kr_samples;
            for (auto& [c, n] : cnt) orb.atoms[c] = Rat(n, opt.kr_samples);
            Rat dkr = kr_distance(nu, orb);
            Rat slack = 2 * noise + truncation_slack(opt.depth);
            Verdict v = dkr + slack < eps(k) ? Verdict::Pass : (dkr - slack > eps(k) ? Verdict::Fail : Verdict::Inconclusive);
            add_line(rep.lines, which == 0 ? "J7-alpha" : "J7-gamma", v, opt.kr_samples, v == Verdict::Fail,
                     K + " d_KR ~ " + approx(dkr, 4) + " +- " + approx(slack, 4) + " vs eps " + approx(eps(k), 4));
        }
        rep.prep.push_back(std::move(pj));
    }
    return rep;
}

// ---------------------------------------------------------------- barycenter recursion

void check_bary_admissible(const BarySequence& s, double c) {
    size_t n = s.zeta.size();
    if (n == 0) throw PreconditionViolated("empty sequence");
    if (s.a.size() != n || s.b.size() != n || s.delta.size() != n) throw PreconditionViolated("length mismatch");
    size_t d = s.zeta[0].size();
    for (size_t i = 0; i < n; ++i) {
        if (s.zeta[i].size() != d) throw PreconditionViolated("ragged zeta");
        for (double z : s.zeta[i])
            if (z < 0 || z > 1) throw PreconditionViolated("zeta outside [0,1] at i = " + std::to_string(i));
        if (s.delta[i] < 0 || s.delta[i] >= 0.5) throw PreconditionViolated("delta outside [0, 1/2)");
        if (i == 0) continue;
        if (!(s.a[i] > c && s.b[i] > c)) throw PreconditionViolated("a_i or b_i not above c at i = " + std::to_string(i));
        double sum = s.a[i] + s.b[i];
        if (sum > 1 + 1e-15) throw PreconditionViolated("a_i + b_i > 1 at i = " + std::to_string(i));
        if (!(sum > 1 - s.delta[i]) && !(s.delta[i] == 0 && sum >= 1 - 1e-15))
            throw PreconditionViolated("a_i + b_i <= 1 - delta_i at i = " + std::to_string(i));
        for (size_t l = 0; l < d; ++l) {
            double target = s.a[i] * s.zeta[i - 1][(l + d - 1) % d] + s.b[i] * s.zeta[i - 1][l];
            double err = std::fabs(s.zeta[i][l] - target);
            if (s.delta[i - 1] > 0 ? err >= s.delta[i - 1] : err > 1e-12)
                throw PreconditionViolated("recursion violated at i = " + std::to_string(i));
        }
    }
}

double bary_deviation(const BarySequence& s, int k, int i) {
    const auto& zk = s.zeta[static_cast<size_t>(k)];
    double avg = 0;
    for (double z : zk) avg += z;
    avg /= static_cast<double>(zk.size());
    double out = 0;
    for (double z : s.zeta[static_cast<size_t>(i)]) out = std::max(out, std::fabs(z - avg));
    return out;
}

BarySequence bary_simulate(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& delta,
                           const std::vector<double>& zeta0, Rng& rng) {
    BarySequence s{a, b, delta, {zeta0}};
    size_t d = zeta0.size();
    for (size_t i = 1; i < a.size(); ++i) {
        std::vector<double> z(d);
        for (size_t l = 0; l < d; ++l) {
            double target = a[i] * s.zeta[i - 1][(l + d - 1) % d] + b[i] * s.zeta[i - 1][l];
            double noise = delta[i - 1] * 0.999 * (2 * rng.uniform() - 1);
            z[l] = std::clamp(target + noise, 0.0, 1.0);
        }
        s.zeta.push_back(std::move(z));
    }
    return s;
}

std::string BaryReport::text() const {
    std::ostringstream os;
    os << "rho=" << rho << " rho_observed=" << rho_observed << " C=" << C << " C_fit=" << C_fit << " checks=" << checks
       << " violations=" << violations << " worst deviation/bound=" << worst_ratio << "\n";
    return os.str();
}

BaryReport bary_recursion_check(const BaryOptions& opt, Rng& rng) {
    if (opt.d < 1 || opt.c <= 0 || 2 * opt.c >= 1 || opt.delta_max < 0 || opt.delta_max >= 0.5 || opt.steps < 2)
        throw PreconditionViolated("bary options out of range");
    BaryReport rep;
    const int d = opt.d;
    // Dobrushin: every entry of a product of d-1 steps is at least c^(d-1)
    rep.rho = d == 1 ? 0.0 : std::pow(1.0 - d * std::pow(opt.c, d - 1), 1.0 / (d - 1));
    struct Trial {
        BarySequence s;
    };
    std::vector<Trial> trials;
    for (long long t = 0; t < opt.trials; ++t) {
        bool exact = t % 2 == 0;
        size_t n = static_cast<size_t>(opt.steps) + 1;
        std::vector<double> a(n), b(n), del(n);
        for (size_t i = 0; i < n; ++i) {
            del[i] = exact ? 0.0 : opt.delta_max * rng.uniform();
            double sum = 1 - del[i] * rng.uniform();
            double x = opt.c + (sum - 2 * opt.c) * (0.001 + 0.998 * rng.uniform());
            a[i] = x;
            b[i] = sum - x;
        }
        std::vector<double> z0(static_cast<size_t>(d));
        for (auto& z : z0) z = rng.uniform();
        BarySequence s = bary_simulate(a, b, del, z0, rng);
        check_bary_admissible(s, opt.c);
        if (exact)
            for (int i = 1; i <= opt.steps; ++i) {
                auto spread = [&](int j) {
                    auto [lo, hi] = std::minmax_element(s.zeta[j].begin(), s.zeta[j].end());
                    return *hi - *lo;
                };
                if (spread(i - 1) > 1e-9) rep.rho_observed = std::max(rep.rho_observed, spread(i) / spread(i - 1));
            }
        trials.push_back({std::move(s)});
    }
    auto bound_shape = [&](const BarySequence& s, int k, int i) {
        double sum = 0;
        for (int j = k; j <= i; ++j) sum += s.delta[j] + s.delta[j] / (1 - s.delta[j]);
        return std::make_pair(sum, std::pow(rep.rho, i - k));
    };
    // spread_i <= rho^(i-k) spread_k / theta + 2 sum delta and |mean_i - mean_k| <= 2 sum delta
    const double theta = 1.0 - d * std::pow(opt.c, d - 1);
    rep.C = d == 1 ? 2.0 : std::max(1.0 / theta, 2.0);
    for (auto& tr : trials)
        for (int k : {0, opt.steps / 4, opt.steps / 2})
            for (int i = k + 1; i <= opt.steps; ++i) {
                auto [sd, rr] = bound_shape(tr.s, k, i);
                double dev = bary_deviation(tr.s, k, i);
                double bound = rep.C * (sd + rr);
                ++rep.checks;
                if (dev > bound) ++rep.violations;
                rep.C_fit = std::max(rep.C_fit, dev / (sd + rr));
                if (bound > 0) rep.worst_ratio = std::max(rep.worst_ratio, dev / bound);
            }
    return rep;
}

// ---------------------------------------------------------------- Cauchy evidence

std::string CauchyReport::text() const {
    std::ostringstream os;
    os << "depth=" << depth << " samples=" << samples << " slack=" << approx(slack, 4) << "\n";
    for (size_t k = 0; k < d_alpha.size(); ++k)
        os << "d_KR(nu_alpha(" << k << "), nu_alpha(" << k + 1 << ")) = " << approx(d_alpha[k], 6)
           << "  noise ~ " << approx(noise[k], 4) << "\n";
    os << "monotone=" << (monotone ? "yes" : "no") << "\n";
    os << "midpoint vs product of marginals = " << approx(mid_vs_product, 6) << "  noise ~ " << approx(mid_noise, 4)
       << "  far=" << (far_from_product ? "yes" : "no") << "\n";
    return os.str();
}

CauchyReport joining_cauchy(const Space& sp, int kmax, long long samples, int depth, Rng& rng) {
    const Tables& tb = sp.tables();
    PQSeq pq = table_heights(tb);
    if (kmax < 1 || kmax + 1 > static_cast<int>(pq.P.size())) throw ScaleOverflow("k beyond materialized heights");
    JoiningTimes jt = joining_times(pq, kmax);
    CauchyReport rep;
    rep.depth = depth;
    rep.samples = samples;
    rep.alpha = jt.alpha;
    rep.slack = truncation_slack(depth);
    long long h = samples / 2;
    auto halves = [&](const Int& t) {
        EmpiricalJoining a = empirical_joining(sp, t, h, depth, rng);
        EmpiricalJoining b = empirical_joining(sp, t, samples - h, depth, rng);
        return std::make_pair(a, b);
    };
    std::vector<EmpiricalJoining> full;
    std::vector<Rat> noise;
    std::pair<EmpiricalJoining, EmpiricalJoining> last_alpha;
    for (int k = 0; k <= kmax; ++k) {
        auto hv = halves(jt.alpha[k]);
        noise.push_back(kr_distance(hv.first, hv.second));
        full.push_back(mixture(hv.first, hv.second, Rat(h, samples)));
        if (k == kmax) last_alpha = std::move(hv);
    }
    rep.monotone = true;
    for (int k = 0; k < kmax; ++k) {
        rep.d_alpha.push_back(kr_distance(full[k], full[k + 1]));
        rep.noise.push_back(noise[k] + noise[k + 1]);
        if (k > 0 && rep.d_alpha[k] + rep.slack > rep.d_alpha[k - 1] + rep.slack) rep.monotone = false;
    }
    auto gh = halves(jt.gamma[kmax]);
    EmpiricalJoining gfull = mixture(gh.first, gh.second, Rat(h, samples));
    EmpiricalJoining mid = mixture(full[kmax], gfull, Rat(1, 2));
    rep.mid_vs_product = kr_to_product(mid);
    rep.mid_noise = kr_distance(mixture(last_alpha.first, gh.first, Rat(1, 2)), mixture(last_alpha.second, gh.second, Rat(1, 2)));
    rep.far_from_product = rep.mid_vs_product > 5 * rep.mid_noise;
    return rep;
}

std::vector<MixingPoint> mixing_profile(const Space& sp, long long samples, Rng& rng) {
    const Tables& tb = sp.tables();
    std::vector<MixingPoint> out;
    for (int k = 1; k <= tb.K; ++k) {
        MixingPoint p;
        p.k = k;
        p.r = tb.p[k];
        for (long long n = 0; n < samples; ++n) {
            Word x = sp.sample_X(rng);
            Word y = sp.T(x, p.r).y;
            ++p.samples;
            p.hits += (x(1) == 0) != (y(1) == 0);
        }
        p.value = static_cast<double>(p.hits) / static_cast<double>(p.samples);
        p.ci = wilson(p.hits, p.samples);
        out.push_back(p);
    }
    return out;
}

}  // namespace rank1lab
