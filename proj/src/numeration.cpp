#include "rank1lab/numeration.hpp"

#include "rank1lab/errors.hpp"

#include <algorithm>
#include <sstream>

namespace rank1lab {

Int TowerExpansion::reconstruct(const Tables& tb) const {
    Int s = 0;
    for (int j = 1; j <= J; ++j) s += Int(e[j]) * tb.p[j];
    return s;
}

std::string TowerExpansion::json() const {
    std::ostringstream os;
    os << "{\"r\": \"" << r << "\", \"J\": " << J << ", \"lst\": " << lst << ", \"e\": [";
    for (int j = 1; j <= J; ++j) os << (j > 1 ? ", " : "") << e[j];
    os << "]}";
    return os.str();
}

int Numeration::scale(const Int& r) const {
    if (r == 0) return 0;
    Int twice = 2 * iabs(r);
    const auto& p = tb_->p;
    if (twice > p[tb_->K + 1]) throw ScaleOverflow("|r| = " + iabs(r).str() + " beyond materialized scales");
    // largest j with p(j) < 2|r|; p is increasing from index 1
    auto it = std::lower_bound(p.begin() + 1, p.end(), twice);
    return static_cast<int>(it - p.begin()) - 1;
}

long long Numeration::lst(const Int& r) const {
    int J = scale(r);
    if (J == 0) return 0;
    Int a = iabs(r), pj = tb_->p[J];
    Int q = a / pj;
    Int rem = a - q * pj;
    if (2 * rem >= pj) q += 1;  // ties go to the larger |e|
    long long e = q.convert_to<long long>();
    if (2 * e > s_->c(J) + 1) throw DigitBoundViolated("e(" + std::to_string(J) + ") = " + std::to_string(e));
    return r < 0 ? -e : e;
}

TowerExpansion Numeration::expand(const Int& r) const {
    TowerExpansion x;
    x.r = r;
    x.J = scale(r);
    x.e.assign(x.J + 1, 0);
    Int rest = r;
    int prev = x.J + 1;
    while (rest != 0) {
        int J = scale(rest);
        if (J >= prev) throw DigitBoundViolated("non-decreasing scale in remainder");
        long long e = lst(rest);
        x.e[J] = e;
        rest -= Int(e) * tb_->p[J];
        prev = J;
    }
    x.lst = x.J ? x.e[x.J] : 0;
    return x;
}

bool Numeration::unbounded_scale(const Int& r) const {
    int J = scale(r);
    return J > 0 && s_->unbounded(J);
}

Int Numeration::L(const Int& r) const {
    int J = scale(r);
    if (J == 0 || !s_->unbounded(J)) throw NotUnboundedScale("J(" + r.str() + ") = " + std::to_string(J));
    return r - Int(lst(r)) * tb_->p[J];
}

Int Numeration::R(const Int& r) const {
    int J = scale(r);
    if (J == 0 || !s_->unbounded(J)) throw NotUnboundedScale("J(" + r.str() + ") = " + std::to_string(J));
    long long e = lst(r);
    return r - Int(e) * tb_->p[J] + Int(e) * tb_->q[J];
}

bool LemmaReport::ok() const {
    for (const auto& l : lines)
        if (l.failures) return false;
    return true;
}

LemmaTally& LemmaReport::line(const std::string& name) {
    for (auto& l : lines)
        if (l.lemma == name) return l;
    lines.push_back({name, 0, 0, 0, ""});
    return lines.back();
}

std::string LemmaReport::text() const {
    std::ostringstream os;
    for (const auto& l : lines) {
        os << l.lemma;
        for (size_t i = l.lemma.size(); i < 18; ++i) os << ' ';
        os << (l.failures ? "FAIL" : "pass") << "  tested=" << l.tested << " skipped=" << l.skipped
           << " failures=" << l.failures;
        if (l.failures) os << "  first: " << l.witness;
        os << '\n';
    }
    return os.str();
}

namespace {

bool is_unb(const Schedule& s, int J) { return J > 0 && s.unbounded(J); }

// 4|x| < 3 p  <=>  |x| < (3/4) p
bool below_three_quarters(const Int& x, const Int& p) { return 4 * iabs(x) < 3 * p; }

bool fits(const Numeration& nm, const Int& r) {
    return 2 * iabs(r) <= nm.tables().p[nm.tables().K + 1];
}

}  // namespace

void check_reduction_lemmas_at(const Numeration& nm, const Int& m, LemmaReport& rep) {
    const Schedule& s = nm.schedule();
    const Tables& tb = nm.tables();
    auto& rt = rep.line("round-trip");
    auto& ob = rep.line("obvious_thing");
    auto& mono = rep.line("monotone");
    TowerExpansion x = nm.expand(m);
    ++rt.tested;
    bool digits_ok = true;
    for (int j = 1; j <= x.J; ++j)
        if (2 * std::llabs(x.e[j]) > s.c(j) + 1) digits_ok = false;
    if (x.reconstruct(tb) != m || !digits_ok || (m != 0 && x.lst == 0)) rt.fail("m=" + m.str());
    if (m != 0) {
        ++ob.tested;
        if (!(4 * iabs(m) <= 3 * tb.p[x.J + 1])) ob.fail("m=" + m.str());
        ++mono.tested;
        if (!(iabs(m - Int(x.lst) * tb.p[x.J]) < iabs(m))) mono.fail("m=" + m.str());
    }

    auto& nil = rep.line("need_it_later");
    auto& lrb = rep.line("lot_red_bound");
    auto& l213 = rep.line("lemma-2.13");
    auto& lr = rep.line("reduction_LR");
    int J = x.J;
    if (!is_unb(s, J)) {
        ++nil.skipped;
        ++lrb.skipped;
        ++l213.skipped;
        ++lr.skipped;
        return;
    }
    Int L = nm.L(m), R = nm.R(m);
    const Int& pJ = tb.p[J];
    const Int& qJ = tb.q[J];
    ++nil.tested;
    if (!(iabs(L) <= pJ && iabs(R) <= pJ - qJ)) nil.fail("m=" + m.str());
    ++lrb.tested;
    if (!(2 * iabs(Int(x.lst) * qJ) <= tb.p[J - 1])) lrb.fail("m=" + m.str());
    int JL = nm.scale(L), JR = nm.scale(R);
    ++lr.tested;
    if (!((JR < J || below_three_quarters(R, pJ)) && JL < J)) lr.fail("m=" + m.str());
    if (s.index_of(J) == 1) {
        ++l213.skipped;  // lambda(a(1)) is not defined
    } else {
        long long lam = s.lambda(J);
        ++l213.tested;
        bool ok = std::max(JL, JR) >= lam;
        if (is_unb(s, JL) && is_unb(s, JR))
            ok = ok && JL != J && JR != J && (JL == lam || JR == lam);
        if (!ok) l213.fail("m=" + m.str());
    }
}

void check_for_pairing(const Numeration& nm, int r, LemmaReport& rep) {
    const Schedule& s = nm.schedule();
    const Tables& tb = nm.tables();
    auto& fp = rep.line("for_pairing");
    if (r < 2 || s.a(r) > tb.K) {
        ++fp.skipped;
        return;
    }
    Int Qr = tb.Q(r);
    long long kmax = 2 * s.d(r) + 3;
    for (long long k = -kmax; k <= kmax; ++k) {
        if (k == 0) continue;
        Int x = Int(k) * Qr;
        ++fp.tested;
        int J = nm.scale(x);
        std::string w = "r=" + std::to_string(r) + " k=" + std::to_string(k);
        if (is_unb(s, J) && J != s.a(r - 1)) {
            fp.fail(w + " J(kQ(r))=" + std::to_string(J));
            continue;
        }
        if (!is_unb(s, J) || r < 3) continue;
        Int L = nm.L(x), R = nm.R(x);
        int JL = nm.scale(L), JR = nm.scale(R);
        long long a2 = s.a(r - 2);
        bool first = JL == a2 && JR == a2;
        if (!first && is_unb(s, JL) && is_unb(s, JR)) {
            fp.fail(w + " scales of L,R = " + std::to_string(JL) + "," + std::to_string(JR));
            continue;
        }
        if (first) {
            Int Qr1 = tb.Q(r - 1);
            long long bound = 2 * s.d(r - 2) + 3;
            for (const Int* v : {&L, &R}) {
                Int rem = *v % Qr1;
                Int kk = *v / Qr1;
                if (rem != 0 || iabs(kk) > bound) {
                    fp.fail(w + " reduction not of form k'Q(r-1)");
                    break;
                }
            }
        }
    }
}

long long multiplier_bound(const Numeration& nm, const Int& m) {
    int J = nm.scale(m);
    int b = nm.schedule().index_of(J);
    if (!b) throw PreconditionViolated("J(m) bounded");
    return 6 * nm.schedule().d(b);
}

void check_reduc_multiply(const Numeration& nm, const Int& m, long long k, LemmaReport& rep) {
    const Schedule& s = nm.schedule();
    const Tables& tb = nm.tables();
    auto& rm = rep.line("reduc_multiply");
    int J = nm.scale(m);
    if (!is_unb(s, J) || k == 0) {
        ++rm.skipped;
        return;
    }
    Int km = Int(k) * m;
    if (!fits(nm, km)) {
        ++rm.skipped;
        return;
    }
    int Jk = nm.scale(km);
    if (!is_unb(s, Jk)) {
        ++rm.skipped;
        return;
    }
    std::string w = "m=" + m.str() + " k=" + std::to_string(k);
    bool has_lambda = s.index_of(J) > 1;
    long long lam = has_lambda ? s.lambda(J) : 0;
    const Int& pJ = tb.p[J];
    Int Rm = nm.R(m), Lm = nm.L(m);
    Int Rk = nm.R(km), Lk = nm.L(km);
    int JRm = nm.scale(Rm), JLm = nm.scale(Lm), JRk = nm.scale(Rk), JLk = nm.scale(Lk);
    if (is_unb(s, JRm)) {
        ++rm.tested;
        bool ok = Rk == Int(k) * Rm || !is_unb(s, JRk) ||
                  (JRm == J && below_three_quarters(Rm, pJ)) || (JRk == J && below_three_quarters(Rk, pJ));
        if (!ok) rm.fail(w + " (R trichotomy)");
        if (has_lambda && JRk == lam && !(std::llabs(k) < 6 * s.d(s.index_of(JRm))))
            rm.fail(w + " (R moreover)");
    }
    if (is_unb(s, JLm)) {
        ++rm.tested;
        bool ok = Lk == Int(k) * Lm || !is_unb(s, JLk);
        if (!ok) rm.fail(w + " (L dichotomy)");
        if (has_lambda && JLk == lam && !(std::llabs(k) < 6 * s.d(s.index_of(JLm))))
            rm.fail(w + " (L moreover)");
    }
}

LemmaReport verify_reduction_lemmas_range(const Numeration& nm, const Int& lo, const Int& hi) {
    LemmaReport rep;
    for (Int m = lo; m <= hi; ++m) {
        check_reduction_lemmas_at(nm, m, rep);
        if (nm.unbounded_scale(m)) {
            long long kb = multiplier_bound(nm, m);
            for (long long k = -kb; k <= kb; ++k) check_reduc_multiply(nm, m, k, rep);
        }
    }
    const Schedule& s = nm.schedule();
    for (int r = 2; r <= nm.tables().max_unbounded(); ++r) check_for_pairing(nm, r, rep);
    (void)s;
    return rep;
}

bool check_expansion_bound(const Numeration& nm, const std::vector<long long>& digits) {
    const Tables& tb = nm.tables();
    int J = static_cast<int>(digits.size());
    Int sum = 0;
    for (int j = 1; j <= J; ++j) sum += Int(digits[j - 1]) * tb.p[j];
    long long c = nm.schedule().c(J);
    return iabs(sum) <= Int((c + 1) / 2 + 1) * tb.p[J];
}

}  // namespace rank1lab
