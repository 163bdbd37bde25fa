#include "rank1lab/space.hpp"

#include "rank1lab/errors.hpp"

#include <cstdlib>
#include <sstream>

namespace rank1lab {

const char* to_string(Membership m) {
    switch (m) {
        case Membership::In: return "In";
        case Membership::Out: return "Out";
        default: return "Unknown";
    }
}

uint64_t seed_from_env(uint64_t fallback) {
    const char* e = std::getenv("RANK1LAB_SEED");
    if (!e || !*e) return fallback;
    try {
        return std::stoull(e);
    } catch (const std::exception&) {
        throw ConfigError("RANK1LAB_SEED: not an unsigned integer");
    }
}

Word Word::prefix(int k) const {
    if (k > L()) throw PrefixTooShort("prefix " + std::to_string(k) + " of a length-" + std::to_string(L()) + " word");
    Word w(std::vector<long long>(x.begin(), x.begin() + k));
    w.tail_known = tail_known;
    return w;
}

std::string Word::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    return os.str();
}

Word Word::parse(const std::string& s) {
    Word w;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        long long v = std::stoll(item, &used);
        if (used != item.size() || v < 0) throw ConfigError("point: bad digit '" + item + "'");
        w.x.push_back(v);
    }
    return w;
}

bool agree(const Word& x, const Word& y, int k) {
    if (x.L() < k || y.L() < k) throw PrefixTooShort("=^" + std::to_string(k) + " on shorter words");
    for (int i = 0; i < k; ++i)
        if (x.x[i] != y.x[i]) return false;
    return true;
}

int first_difference(const Word& x, const Word& y) {
    int n = std::min(x.L(), y.L());
    for (int i = 0; i < n; ++i)
        if (x.x[i] != y.x[i]) return i + 1;
    return 0;
}

Space::Space(const Schedule& s, const Tables& tb) : s_(&s), tb_(&tb) {
    r7_.assign(tb.K + 1, Int(0));
    Word w(std::vector<long long>(tb.K, 7));
    for (int j = 1; j <= tb.K; ++j) r7_[j] = below(w, j);
}

void Space::need(const Word& w, int k) const {
    if (w.L() < k) throw PrefixTooShort("need " + std::to_string(k) + " digits, have " + std::to_string(w.L()));
    if (k > K()) throw ScaleOverflow("scale " + std::to_string(k) + " beyond materialized tables");
}

Int Space::value(const Word& w, int k) const {
    need(w, k);
    Int v = 0;
    for (int i = k; i >= 1; --i) v = v * (s_->c(i) + 1) + w(i);
    return v;
}

Word Space::from_value(const Int& v0, int k) const {
    if (k > K()) throw ScaleOverflow("scale beyond tables");
    Int v = floor_mod(v0, tb_->t[k]);
    Word w(std::vector<long long>(k, 0));
    for (int i = 1; i <= k; ++i) {
        long long base = s_->c(i) + 1;
        Int q = v / base;
        w.at(i) = static_cast<long long>((v - q * base).convert_to<long long>());
        v = q;
    }
    return w;
}

namespace {
struct ScanResult {
    Int below;
    int removed_at = 0;
};
}  // namespace

static ScanResult scan(const Schedule& s, const Tables& tb, const Word& w, int k) {
    ScanResult r;
    Int& b = r.below;
    int cmp = 0;  // sign of v(w|j) - v(7^j)
    for (int j = 1; j <= k; ++j) {
        const Int& N = tb.p[j];  // N(j-1)
        long long x = w(j);
        if (x < 0 || x > s.c(j)) throw PreconditionViolated("digit out of alphabet at " + std::to_string(j));
        if (!s.removals()) {
            b += Int(x) * N;
        } else if (int n = s.index_of(j)) {
            long long d = s.d(n);
            Int NQ = N - tb.q[j];
            if (x >= d + 1 && r.removed_at == 0 && b >= NQ) r.removed_at = j;
            Int cols = x <= d + 1 ? Int(Int(x) * N) : Int(Int(d + 1) * N + Int(x - d - 1) * NQ);
            if (x >= d + 1 && b > NQ) b = NQ;
            b += cols;
        } else {
            if (x == 8 && cmp == 0 && r.removed_at == 0) r.removed_at = j;
            if (x == 8 && cmp > 0) b -= 1;
            b += Int(x) * N;
            if (x > 8) b -= 1;
        }
        if (x != 7) cmp = x > 7 ? 1 : -1;
    }
    return r;
}

Int Space::below(const Word& w, int k) const {
    need(w, k);
    return scan(*s_, *tb_, w, k).below;
}

int Space::first_removed(const Word& w, int k) const {
    need(w, k);
    return scan(*s_, *tb_, w, k).removed_at;
}

Int Space::rank(const Word& w, int k) const {
    need(w, k);
    ScanResult r = scan(*s_, *tb_, w, k);
    if (r.removed_at) throw RemovedCylinder("prefix removed at scale " + std::to_string(r.removed_at));
    return r.below;
}

Word Space::unrank(const Int& rho, int k) const {
    if (k > K()) throw ScaleOverflow("scale beyond tables");
    if (rho < 0 || rho >= tb_->N(k)) throw PreconditionViolated("rank out of range");
    Word w(std::vector<long long>(k, 0));
    Int rest = rho;
    for (int j = k; j >= 1; --j) {
        const Int& N = tb_->p[j];
        long long x;
        if (!s_->removals()) {
            Int q = rest / N;
            x = q.convert_to<long long>();
            rest -= q * N;
        } else if (int n = s_->index_of(j)) {
            long long d = s_->d(n);
            Int NQ = N - tb_->q[j];
            Int lim = Int(d + 1) * N;
            if (rest < lim) {
                Int q = rest / N;
                x = q.convert_to<long long>();
                rest -= q * N;
            } else {
                rest -= lim;
                Int q = rest / NQ;
                x = d + 1 + q.convert_to<long long>();
                rest -= q * NQ;
            }
        } else {
            if (rest < 8 * N) {
                Int q = rest / N;
                x = q.convert_to<long long>();
                rest -= q * N;
            } else if (rest < 9 * N - 1) {
                x = 8;
                rest -= 8 * N;
                if (rest >= r7_[j - 1]) rest += 1;  // skip 7^(j-1)
            } else {
                x = 9;
                rest -= 9 * N - 1;
            }
        }
        w.at(j) = x;
    }
    return w;
}

Membership Space::in_W(const Word& w, int k) const {
    if (w.L() < k) return Membership::Unknown;
    need(w, k);
    if (!s_->removals()) return Membership::Out;
    ScanResult r = scan(*s_, *tb_, w, k);
    return r.removed_at == k ? Membership::In : Membership::Out;
}

Membership Space::in_Y(const Word& w, int k) const {
    int L = std::min(w.L(), k);
    int fr = first_removed(w, std::min(L, K()));
    if (fr) return Membership::Out;
    if (w.L() < k) return Membership::Unknown;
    need(w, k);
    return Membership::In;
}

Membership Space::in_X(const Word& w) const {
    int L = std::min(w.L(), K());
    if (first_removed(w, L)) return Membership::Out;
    if (s_->finite() && w.L() >= K()) return Membership::In;
    return Membership::Unknown;
}

Int Space::removed_below(const Int& v, int k) const {
    if (!s_->removals()) return 0;
    Word w = from_value(v, k);
    if (int n = s_->index_of(k)) {
        long long d = s_->d(n);
        long long x = w(k);
        if (x < d + 1) return 0;
        const Int& N = tb_->p[k];
        Int NQ = N - tb_->q[k];
        Int out = Int(x - d - 1) * tb_->q[k];
        Int b = scan(*s_, *tb_, w, k - 1).below;
        if (b > NQ) out += b - NQ;
        return out;
    }
    // the single word 7^(k-1) 8
    Word r(std::vector<long long>(k, 7));
    r.at(k) = 8;
    return value(r, k) < value(w, k) ? 1 : 0;
}

Int Space::visits(const Word& w, int k, const Int& lo, const Int& hi) const {
    need(w, k);
    if (hi < lo) return 0;
    const Int& t = tb_->t[k];
    const Int& cnt = tb_->removed[k];
    Int v0 = value(w, k);
    auto G = [&](const Int& u) { return Int(floor_div(u, t) * cnt + removed_below(floor_mod(u, t), k)); };
    return G(v0 + hi + 1) - G(v0 + lo);
}

Membership Space::in_bad(const Word& w, int b, const Int& r) const {
    need(w, b);
    if (!survives(w, b)) throw RemovedCylinder("Bad(b,r) is taken inside Y_b");
    Int hi = stime(w, b, iabs(r));
    Int lo = stime(w, b, -iabs(r));
    bool unknown = !s_->finite();
    for (int n = s_->count_upto(b) + 1; n <= s_->count() && s_->a(n) <= K(); ++n) {
        int an = static_cast<int>(s_->a(n));
        if (w.L() < an) {
            unknown = true;
            continue;
        }
        if (visits(w, an, lo, hi) > 0) return Membership::In;
    }
    return unknown ? Membership::Unknown : Membership::Out;
}

Word Space::odometer_add(const Word& w, const Int& m) const {
    Word y = w;
    Int carry = m;
    for (int i = 1; i <= y.L() && carry != 0; ++i) {
        long long base = s_->c(i) + 1;
        Int sum = carry + y(i);
        Int q = floor_div(sum, Int(base));
        y.at(i) = (sum - q * base).convert_to<long long>();
        carry = q;
    }
    if (carry != 0) y.tail_known = false;
    return y;
}

Orbit Space::induced(const Word& w, int b, const Int& r) const {
    need(w, b);
    ScanResult sr = scan(*s_, *tb_, w, b);
    if (sr.removed_at) throw RemovedCylinder("point outside Y_" + std::to_string(b));
    const Int& N = tb_->N(b);
    Int tot = sr.below + r;
    Int q = floor_div(tot, N);
    Word head = unrank(tot - q * N, b);
    Word y = w;
    for (int i = 1; i <= b; ++i) y.at(i) = head(i);
    Orbit o;
    o.stime = value(head, b) - value(w, b) + q * tb_->t[b];
    if (q != 0) {
        // carry into the digits beyond b
        Int carry = q;
        for (int i = b + 1; i <= y.L() && carry != 0; ++i) {
            long long base = s_->c(i) + 1;
            Int sum = carry + y(i);
            Int qq = floor_div(sum, Int(base));
            y.at(i) = (sum - qq * base).convert_to<long long>();
            carry = qq;
        }
        if (carry != 0) y.tail_known = false;
    }
    o.y = std::move(y);
    return o;
}

Orbit Space::T(const Word& w, const Int& r) const {
    Membership m = in_X(w);
    if (m == Membership::Out) throw RemovedCylinder("point outside X");
    if (m == Membership::Unknown)
        throw InsufficientPrecision("X membership undecided for a length-" + std::to_string(w.L()) + " prefix");
    return induced(w, K(), r);
}

Orbit Space::induced_search(const Word& w, int b, const Int& r) const {
    need(w, b);
    if (!survives(w, b)) throw RemovedCylinder("point outside Y_" + std::to_string(b));
    if (r == 0) return {w, Int(0)};
    const Int& t = tb_->t[b];
    const Int& N = tb_->N(b);
    Int v0 = value(w, b);
    auto F = [&](const Int& u) {
        return Int(floor_div(u, t) * N + below(from_value(floor_mod(u, t), b), b));
    };
    Int need_count = iabs(r);
    bool fwd = r > 0;
    Int base = fwd ? F(v0 + 1) : F(v0);
    auto C = [&](const Int& s) { return fwd ? Int(F(v0 + s + 1) - base) : Int(base - F(v0 - s)); };
    Int lo = 1, hi = (need_count / N + 2) * t;
    while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (C(mid) >= need_count)
            hi = mid;
        else
            lo = mid + 1;
    }
    Int s = fwd ? lo : Int(-lo);
    return {odometer_add(w, s), s};
}

Orbit Space::induced_steps(const Word& w, int b, long long r) const {
    need(w, b);
    if (!survives(w, b)) throw RemovedCylinder("point outside Y_" + std::to_string(b));
    Orbit o{w, Int(0)};
    int dir = r >= 0 ? 1 : -1;
    for (long long i = 0; i < std::llabs(r); ++i) {
        do {
            o.y = odometer_add(o.y, Int(dir));
            o.stime += dir;
        } while (!survives(o.y, b));
    }
    return o;
}

Word Space::sample_X(Rng& rng, long long* rejected) const {
    if (!s_->finite()) throw InsufficientPrecision("X membership is undecidable at an infinite schedule");
    Word w(std::vector<long long>(K(), 0));
    for (;;) {
        for (int i = 1; i <= K(); ++i) w.at(i) = static_cast<long long>(rng.below(s_->c(i) + 1));
        if (survives(w, K())) return w;
        if (rejected) ++*rejected;
    }
}

Word Space::sample_cylinder(Rng& rng, const Word& fixed) const {
    if (!s_->finite()) throw InsufficientPrecision("X membership is undecidable at an infinite schedule");
    if (fixed.L() > K()) throw PreconditionViolated("prefix longer than horizon");
    if (first_removed(fixed, fixed.L())) throw RemovedCylinder("prefix already removed");
    Word w(std::vector<long long>(K(), 0));
    for (int i = 1; i <= fixed.L(); ++i) w.at(i) = fixed(i);
    for (long long tries = 0;; ++tries) {
        for (int i = fixed.L() + 1; i <= K(); ++i) w.at(i) = static_cast<long long>(rng.below(s_->c(i) + 1));
        if (survives(w, K())) return w;
        if (tries > 100000000) throw PreconditionViolated("cylinder appears to miss X");
    }
}

}  // namespace rank1lab
