#include "rank1lab/measure.hpp"

#include "rank1lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace rank1lab {

// ---------------------------------------------------------------- DigitSet

DigitSet DigitSet::range(long long lo, long long hi) {
    DigitSet d;
    if (lo <= hi) d.iv_.push_back({lo, hi});
    return d;
}

DigitSet DigitSet::of(std::initializer_list<long long> ds) {
    DigitSet d;
    for (long long x : ds) d.add(x, x);
    return d;
}

DigitSet& DigitSet::add(long long lo, long long hi) {
    if (lo <= hi) {
        iv_.push_back({lo, hi});
        normalize();
    }
    return *this;
}

void DigitSet::normalize() {
    std::sort(iv_.begin(), iv_.end());
    std::vector<std::pair<long long, long long>> out;
    for (auto& p : iv_) {
        if (!out.empty() && p.first <= out.back().second + 1)
            out.back().second = std::max(out.back().second, p.second);
        else
            out.push_back(p);
    }
    iv_ = std::move(out);
}

long long DigitSet::size() const {
    long long n = 0;
    for (auto& p : iv_) n += p.second - p.first + 1;
    return n;
}

bool DigitSet::contains(long long x) const {
    for (auto& p : iv_)
        if (p.first <= x && x <= p.second) return true;
    return false;
}

DigitSet DigitSet::intersect(const DigitSet& o) const {
    DigitSet r;
    for (auto& a : iv_)
        for (auto& b : o.iv_) {
            long long lo = std::max(a.first, b.first), hi = std::min(a.second, b.second);
            if (lo <= hi) r.iv_.push_back({lo, hi});
        }
    r.normalize();
    return r;
}

DigitSet DigitSet::complement(long long c) const {
    DigitSet r;
    long long at = 0;
    for (auto& p : iv_) {
        if (p.first > at) r.iv_.push_back({at, std::min(p.first - 1, c)});
        at = std::max(at, p.second + 1);
    }
    if (at <= c) r.iv_.push_back({at, c});
    r.normalize();
    return r;
}

DigitSet DigitSet::minus(const DigitSet& o) const {
    if (iv_.empty()) return *this;
    return intersect(o.complement(iv_.back().second));
}

bool DigitSet::within(long long c) const { return iv_.empty() || (iv_.front().first >= 0 && iv_.back().second <= c); }

std::vector<long long> DigitSet::digits() const {
    std::vector<long long> out;
    for (auto& p : iv_)
        for (long long x = p.first; x <= p.second; ++x) out.push_back(x);
    return out;
}

// -------------------------------------------------------------- Constraint

bool Constraint::contradictory() const {
    for (auto& [k, ds] : allowed)
        if (ds.empty()) return true;
    return false;
}

Constraint Constraint::intersect(const Constraint& o) const {
    Constraint r = *this;
    for (auto& [k, ds] : o.allowed) {
        auto it = r.allowed.find(k);
        if (it == r.allowed.end())
            r.allowed[k] = ds;
        else
            it->second = it->second.intersect(ds);
    }
    return r;
}

Constraint Constraint::with(int scale, const DigitSet& ds) const {
    Constraint r = *this;
    auto it = r.allowed.find(scale);
    if (it == r.allowed.end())
        r.allowed[scale] = ds;
    else
        it->second = it->second.intersect(ds);
    return r;
}

Membership Constraint::contains(const Word& w) const {
    bool unknown = false;
    for (auto& [k, ds] : allowed) {
        if (k > w.L()) {
            unknown = true;
            continue;
        }
        if (!ds.contains(w(k))) return Membership::Out;
    }
    return unknown ? Membership::Unknown : Membership::In;
}

int Constraint::max_scale() const { return allowed.empty() ? 0 : allowed.rbegin()->first; }
int Constraint::min_scale() const { return allowed.empty() ? 0 : allowed.begin()->first; }

// ----------------------------------------------------------- ConstraintSet

ConstraintSet ConstraintSet::full() {
    ConstraintSet s;
    s.terms.push_back(Constraint{});
    return s;
}

ConstraintSet ConstraintSet::none() { return ConstraintSet{}; }

ConstraintSet ConstraintSet::cylinder(const Word& prefix) {
    Constraint c;
    for (int i = 1; i <= prefix.L(); ++i) c.allowed[i] = DigitSet::range(prefix(i), prefix(i));
    ConstraintSet s;
    s.terms.push_back(c);
    return s;
}

ConstraintSet ConstraintSet::digit(int scale, const DigitSet& ds) {
    Constraint c;
    c.allowed[scale] = ds;
    ConstraintSet s;
    s.terms.push_back(c);
    return s;
}

ConstraintSet& ConstraintSet::add(const Constraint& c) {
    if (!c.contradictory()) terms.push_back(c);
    return *this;
}

ConstraintSet ConstraintSet::unite(const ConstraintSet& o) const {
    ConstraintSet r = *this;
    for (auto& t : o.terms) r.add(t);
    r.intersect_x = intersect_x || o.intersect_x;
    return r;
}

ConstraintSet ConstraintSet::intersect(const ConstraintSet& o) const {
    ConstraintSet r;
    for (auto& a : terms)
        for (auto& b : o.terms) r.add(a.intersect(b));
    r.intersect_x = intersect_x || o.intersect_x;
    return r;
}

namespace {

// P \ R as disjoint products
std::vector<Constraint> product_minus(const Constraint& P, const Constraint& R) {
    if (P.intersect(R).contradictory()) return {P};
    std::vector<Constraint> out;
    Constraint inside = P;
    for (auto& [k, ds] : R.allowed) {
        DigitSet have = inside.allowed.count(k) ? inside.allowed.at(k) : DigitSet::range(0, 1LL << 62);
        Constraint piece = inside;
        piece.allowed[k] = have.minus(ds);
        if (!piece.contradictory()) out.push_back(piece);
        inside.allowed[k] = have.intersect(ds);
    }
    return out;
}

}  // namespace

ConstraintSet ConstraintSet::normalized() const {
    ConstraintSet r;
    r.intersect_x = intersect_x;
    for (auto& t : terms) {
        std::vector<Constraint> pieces{t};
        for (auto& prev : r.terms) {
            std::vector<Constraint> next;
            for (auto& p : pieces)
                for (auto& q : product_minus(p, prev)) next.push_back(q);
            pieces = std::move(next);
            if (pieces.empty()) break;
        }
        for (auto& p : pieces) r.add(p);
    }
    return r;
}

ConstraintSet ConstraintSet::minus(const ConstraintSet& o) const {
    ConstraintSet r;
    r.intersect_x = intersect_x;
    for (auto& t : normalized().terms) {
        std::vector<Constraint> pieces{t};
        for (auto& q : o.terms) {
            std::vector<Constraint> next;
            for (auto& p : pieces)
                for (auto& z : product_minus(p, q)) next.push_back(z);
            pieces = std::move(next);
        }
        for (auto& p : pieces) r.add(p);
    }
    return r;
}

ConstraintSet ConstraintSet::complement() const { return full().minus(*this); }

Membership ConstraintSet::contains(const Word& w) const {
    bool unknown = false;
    for (auto& t : terms) {
        Membership m = t.contains(w);
        if (m == Membership::In) return Membership::In;
        if (m == Membership::Unknown) unknown = true;
    }
    return unknown ? Membership::Unknown : Membership::Out;
}

bool ConstraintSet::valid(const Schedule& s) const {
    for (auto& t : terms)
        for (auto& [k, ds] : t.allowed)
            if (k < 1 || !ds.within(s.c(k))) return false;
    return true;
}

int ConstraintSet::max_scale() const {
    int m = 0;
    for (auto& t : terms) m = std::max(m, t.max_scale());
    return m;
}

int ConstraintSet::min_scale() const {
    int m = 0;
    for (auto& t : terms) {
        int s = t.min_scale();
        if (s && (m == 0 || s < m)) m = s;
    }
    return m;
}

std::string ConstraintSet::json() const {
    std::ostringstream os;
    os << "{\"terms\": [";
    for (size_t i = 0; i < terms.size(); ++i) {
        os << (i ? ", " : "") << "{";
        bool first = true;
        for (auto& [k, ds] : terms[i].allowed) {
            os << (first ? "" : ", ") << "\"" << k << "\": [";
            first = false;
            bool f2 = true;
            for (auto& p : ds.intervals()) {
                os << (f2 ? "" : ", ");
                f2 = false;
                if (p.first == p.second)
                    os << p.first;
                else
                    os << "\"" << p.first << ".." << p.second << "\"";
            }
            os << "]";
        }
        os << "}";
    }
    os << "], \"intersect_x\": " << (intersect_x ? "true" : "false") << "}";
    return os.str();
}

// ----------------------------------------------------------------- Measure

Measure::Measure(const Space& sp) : sp_(&sp) {
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    if (!s.removals()) return;
    for (int n = 1; n <= s.count() && s.a(n) <= tb.K; ++n) {
        int a = static_cast<int>(s.a(n));
        thresholds_[a] = sp.unrank(tb.N(a - 1) - tb.q[a], a - 1);
    }
}

Rat Measure::nu(const Constraint& c) const {
    const Schedule& s = sp_->schedule();
    Rat r = 1;
    for (auto& [k, ds] : c.allowed) {
        long long cc = s.c(k);
        r *= Rat(ds.intersect(DigitSet::range(0, cc)).size(), cc + 1);
    }
    return r;
}

Rat Measure::nu(const ConstraintSet& set) const {
    Rat r = 0;
    for (auto& t : set.normalized().terms) r += nu(t);
    return r;
}

Int Measure::count_surviving(const Constraint& c, int K) const {
    const Schedule& s = sp_->schedule();
    const Tables& tb = sp_->tables();
    if (K > tb.K) throw ScaleOverflow("count beyond tables");
    auto allowed_at = [&](int j) {
        DigitSet all = DigitSet::range(0, s.c(j));
        auto it = c.allowed.find(j);
        return it == c.allowed.end() ? all : it->second.intersect(all);
    };
    if (!s.removals()) {
        Int n = 1;
        for (int j = 1; j <= K; ++j) n *= allowed_at(j).size();
        return n;
    }
    // comparator 0: prefix vs 7^j; comparator i >= 1: prefix vs thresholds of a(i)
    std::vector<int> cscale{0};
    std::vector<const Word*> cref{nullptr};
    for (auto& [a, w] : thresholds_)
        if (a <= K) {
            cscale.push_back(a);
            cref.push_back(&w);
        }
    const int m = static_cast<int>(cscale.size());
    auto get = [&](uint64_t st, int i) {
        for (int k = 0; k < i; ++k) st /= 3;
        return static_cast<int>(st % 3) - 1;
    };
    std::vector<uint64_t> pw(m + 1, 1);
    for (int i = 1; i <= m; ++i) pw[i] = pw[i - 1] * 3;
    auto set_cmp = [&](uint64_t st, int i, int v) {
        int old = get(st, i);
        return st - static_cast<uint64_t>(old + 1) * pw[i] + static_cast<uint64_t>(v + 1) * pw[i];
    };
    uint64_t start = 0;
    for (int i = 0; i < m; ++i) start += pw[i];  // all comparators "equal"
    std::map<uint64_t, Int> cur{{start, Int(1)}};
    for (int j = 1; j <= K; ++j) {
        DigitSet ok = allowed_at(j);
        if (ok.empty()) return 0;
        int n = s.index_of(j);
        long long dj = n ? s.d(n) : 0;
        // comparators still pending at j
        std::vector<std::pair<int, long long>> act;  // (comparator, reference digit)
        act.push_back({0, 7});
        for (int i = 1; i < m; ++i)
            if (cscale[i] > j) act.push_back({i, (*cref[i])(j)});
        std::set<long long> cuts;
        for (auto& a : act) cuts.insert(a.second);
        if (n)
            cuts.insert(dj + 1);
        else
            cuts.insert(8);
        // segments: singletons at cuts and the gaps between them
        std::vector<std::pair<long long, long long>> segs;
        long long at = 0, cmax = s.c(j);
        for (long long cpt : cuts) {
            if (cpt > cmax) break;
            if (cpt > at) segs.push_back({at, cpt - 1});
            segs.push_back({cpt, cpt});
            at = cpt + 1;
        }
        if (at <= cmax) segs.push_back({at, cmax});
        std::map<uint64_t, Int> nxt;
        for (auto& sg : segs) {
            long long cnt = ok.intersect(DigitSet::range(sg.first, sg.second)).size();
            if (!cnt) continue;
            long long x = sg.first;
            for (auto& [st, v] : cur) {
                bool removed = n ? (x >= dj + 1 && get(st, [&] {
                                        for (int i = 1; i < m; ++i)
                                            if (cscale[i] == j) return i;
                                        return 0;
                                    }()) >= 0)
                                 : (x == 8 && get(st, 0) == 0);
                if (removed) continue;
                uint64_t ns = st;
                for (auto& a : act)
                    if (x != a.second) ns = set_cmp(ns, a.first, x > a.second ? 1 : -1);
                for (int i = 1; i < m; ++i)
                    if (cscale[i] == j) ns = set_cmp(ns, i, 0);  // retire
                nxt[ns] += v * cnt;
            }
        }
        cur = std::move(nxt);
    }
    Int total = 0;
    for (auto& [st, v] : cur) total += v;
    return total;
}

Rat Measure::nu_surviving(const ConstraintSet& set, int K) const {
    const Tables& tb = sp_->tables();
    const Schedule& s = sp_->schedule();
    Rat r = 0;
    for (auto& t : set.normalized().terms) {
        Constraint low, high;
        for (auto& [k, ds] : t.allowed) (k <= K ? low : high).allowed[k] = ds;
        Rat f = Rat(count_surviving(low, K), tb.t[K]);
        for (auto& [k, ds] : high.allowed) f *= Rat(ds.intersect(DigitSet::range(0, s.c(k))).size(), s.c(k) + 1);
        r += f;
    }
    return r;
}

Rat Measure::tail(int K) const {
    const Schedule& s = sp_->schedule();
    const Tables& tb = sp_->tables();
    if (!s.removals()) return 0;
    if (s.finite() && K == tb.K) return 0;
    MassInterval mi = removed_mass(s, tb, K);
    return mi.upper - mi.lower;
}

MeasureInterval Measure::nu_X(int K) const {
    const Tables& tb = sp_->tables();
    Rat hi = Rat(tb.N(K), tb.t[K]);
    Rat lo = hi - tail(K);
    if (lo <= 0) throw TailDiverges("tail bound swallows nu(X)");
    return {lo, hi};
}

MeasureInterval Measure::mu_interval(const ConstraintSet& set, int K) const {
    if (K < 0) K = sp_->tables().K;
    if (set.max_scale() > K && !sp_->schedule().finite())
        throw PreconditionViolated("truncation below the largest constrained scale");
    MeasureInterval nx = nu_X(K);
    Rat hi = nu_surviving(set, K);
    Rat tl = tail(K);
    Rat lo = hi > tl ? Rat(hi - tl) : Rat(0);
    MeasureInterval out{lo / nx.upper, hi / nx.lower};
    if (out.upper > 1) out.upper = 1;
    return out;
}

MeasureInterval Measure::mu_interval(const Constraint& c, int K) const {
    ConstraintSet s;
    s.add(c);
    return mu_interval(s, K);
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

IndependenceReport verify_independence(const Measure& m, const Constraint& D, const Constraint& C, int k) {
    int r = D.max_scale();
    int lo = C.min_scale();
    if (k < 1 || (lo != 0 && lo < r + k) || (lo == 0 && !C.allowed.empty()))
        throw PreconditionViolated("defining indices must be separated by at least k");
    IndependenceReport rep;
    rep.threshold = 1 - Rat(1, Int(1) << k);
    MeasureInterval mD = m.mu_interval(D), mC = m.mu_interval(C), mDC = m.mu_interval(D.intersect(C));
    if (mD.upper == 0 || mDC.upper == 0) throw PreconditionViolated("D or D∩C misses X");
    if (mD.lower == 0 || mC.lower == 0) {
        rep.verdict = Verdict::Inconclusive;
        return rep;
    }
    rep.ratio = {mDC.lower / (mD.upper * mC.upper), mDC.upper / (mD.lower * mC.lower)};
    if (rep.ratio.lower >= rep.threshold)
        rep.verdict = Verdict::Pass;
    else if (rep.ratio.upper < rep.threshold)
        rep.verdict = Verdict::Fail;
    else
        rep.verdict = Verdict::Inconclusive;
    return rep;
}

CylinderLemmaReport verify_cylinder_lemmas(const Measure& m, int len) {
    const Space& sp = m.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    CylinderLemmaReport rep;
    // per-n terms of the decay sum; n = 1 uses 2Q(1)/P(1) since P(0) is not defined
    auto term = [&](int n) {
        return n == 1 ? Rat(2 * tb.Q(1), tb.P(1)) : Rat(4 * tb.P(n - 1), tb.P(n));
    };
    int nmax = tb.max_unbounded();
    Rat Sall = 0;
    for (int n = 1; n <= nmax; ++n) Sall += term(n);
    MeasureInterval nx = m.nu_X(tb.K);
    rep.xi = (Rat(8, 9) - Sall) / nx.upper;
    for (int L = 1; L <= len; ++L) {
        Rat S = 0;
        for (int n = 1; n <= nmax; ++n)
            if (s.a(n) > L) S += term(n);
        for (Int v = 0; v < tb.t[L]; ++v) {
            Word w = sp.from_value(v, L);
            if (sp.first_removed(w, L)) continue;
            ++rep.cylinders;
            ConstraintSet C = ConstraintSet::cylinder(w);
            Rat inside = m.nu_surviving(C, tb.K);
            Rat outside = Rat(1, tb.t[L]) - inside;
            bool all7 = std::all_of(w.x.begin(), w.x.end(), [](long long d) { return d == 7; });
            if (!all7 && outside > S / tb.t[L]) {
                if (rep.decay_failures++ == 0) rep.witness = "decay at " + w.str();
            }
            if (m.mu_interval(C).lower < rep.xi / tb.t[L]) {
                if (rep.size_failures++ == 0) rep.witness = "size at " + w.str();
            }
        }
    }
    return rep;
}

Wilson wilson(long long hits, long long n, double z) {
    if (n == 0) return {0.0, 1.0};
    double ph = static_cast<double>(hits) / n;
    double den = 1 + z * z / n;
    double mid = (ph + z * z / (2.0 * n)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4.0 * n * n)) / den;
    return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

TowerReport rank_one_tower(const Measure& m, int n, long long samples, Rng& rng) {
    const Space& sp = m.space();
    const Schedule& s = sp.schedule();
    const Tables& tb = sp.tables();
    if (!s.finite()) throw ScheduleTooLarge("tower checks need a finite desk schedule");
    TowerReport rep;
    rep.n = n;
    rep.a = s.a(n);
    int a = static_cast<int>(rep.a);
    if (a > tb.K) throw ScheduleTooLarge("a(n) beyond horizon");
    // x(1..a-1) = 7, x(a) = 8
    rep.base = Word(std::vector<long long>(a, 7));
    rep.base.at(a) = 8;
    rep.base_survives = sp.survives(rep.base, a);
    if (!rep.base_survives) return rep;
    Int rb = sp.rank(rep.base, a);
    rep.h = tb.N(a) - 1 - rb;
    rep.h_below_t = rep.h < tb.t[a];
    rep.base_mu = m.mu_interval(ConstraintSet::cylinder(rep.base));
    for (long long i = 0; i < samples; ++i) {
        Word x = sp.sample_cylinder(rng, rep.base);
        ++rep.sampled;
        if (sp.in_bad(x, a, rep.h) != Membership::Out) {
            ++rep.excluded_bad;
            continue;
        }
        for (int rep_i = 0; rep_i < 4; ++rep_i) {
            Int lvl = Int(rng.next()) % rep.h;
            Word y = sp.T(x, lvl).y;
            ++rep.level_checks;
            if (!(y.prefix(a) == sp.unrank(rb + lvl, a))) ++rep.level_mismatches;
        }
    }
    Wilson w = wilson(rep.excluded_bad, rep.sampled);
    Rat hb(rep.h);
    rep.cover.lower = hb * rep.base_mu.lower * Rat(1.0 - w.hi);
    rep.cover.upper = hb * rep.base_mu.upper * Rat(1.0 - w.lo);
    if (rep.cover.upper > 1) rep.cover.upper = 1;
    return rep;
}

namespace {

void span(const Schedule& s, const Word& lo, const Word& hi, int k, const Constraint& pre, bool lt, bool ht,
          ConstraintSet& out) {
    if (k == 0 || (!lt && !ht)) {
        out.add(pre);
        return;
    }
    long long a = lt ? lo(k) : 0, b = ht ? hi(k) : s.c(k);
    if (a > b) return;
    if (a == b) {
        span(s, lo, hi, k - 1, pre.with(k, DigitSet::of({a})), lt, ht, out);
        return;
    }
    span(s, lo, hi, k - 1, pre.with(k, DigitSet::of({a})), lt, false, out);
    if (a + 1 <= b - 1) out.add(pre.with(k, DigitSet::range(a + 1, b - 1)));
    span(s, lo, hi, k - 1, pre.with(k, DigitSet::of({b})), false, ht, out);
}

long long pick(const DigitSet& ds, Rng& rng) {
    auto i = static_cast<long long>(rng.below(static_cast<uint64_t>(ds.size())));
    for (auto& [a, b] : ds.intervals()) {
        if (i <= b - a) return a + i;
        i -= b - a + 1;
    }
    throw PreconditionViolated("empty digit set");
}

}  // namespace

ConstraintSet value_window(const Space& sp, int k, const Int& lo, const Int& hi) {
    ConstraintSet out;
    if (k == 0) {
        if (lo <= 0 && hi >= 0) out.add(Constraint{});
        return out;
    }
    Int top = sp.tables().t[k] - 1;
    Int l = lo < 0 ? Int(0) : lo, h = hi > top ? top : hi;
    if (l > h) return out;
    span(sp.schedule(), sp.from_value(l, k), sp.from_value(h, k), k, Constraint{}, true, true, out);
    return out;
}

ConstraintSet rank_window(const Space& sp, int k, const Int& lo, const Int& hi) {
    if (k == 0) return value_window(sp, 0, lo, hi);
    const Int& N = sp.tables().N(k);
    Int l = lo < 0 ? Int(0) : lo, h = hi >= N ? Int(N - 1) : hi;
    if (l > h) return {};
    return value_window(sp, k, sp.value(sp.unrank(l, k), k), sp.value(sp.unrank(h, k), k));
}

Word sample_in(const Measure& m, const ConstraintSet& set, Rng& rng, long long* rejected) {
    const Space& sp = m.space();
    const Schedule& s = sp.schedule();
    if (!s.finite()) throw InsufficientPrecision("X membership is undecidable at an infinite schedule");
    ConstraintSet ns = set.normalized();
    std::vector<double> cum;
    double tot = 0;
    for (auto& t : ns.terms) cum.push_back(tot += to_double(m.nu(t)));
    if (tot <= 0) throw PreconditionViolated("sampling from a nu-null set");
    int K = sp.K();
    Word w(std::vector<long long>(K, 0));
    for (long long tries = 0; tries < 100000000; ++tries) {
        double u = rng.uniform() * tot;
        size_t ti = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (ti >= ns.terms.size()) ti = ns.terms.size() - 1;
        const Constraint& t = ns.terms[ti];
        for (int i = 1; i <= K; ++i) {
            DigitSet all = DigitSet::range(0, s.c(i));
            auto it = t.allowed.find(i);
            w.at(i) = pick(it == t.allowed.end() ? all : it->second.intersect(all), rng);
        }
        if (sp.survives(w, K)) return w;
        if (rejected) ++*rejected;
    }
    throw PreconditionViolated("set appears to miss X");
}

}  // namespace rank1lab
