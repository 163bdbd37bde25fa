#include "rank1lab/campaign.hpp"

#include "rank1lab/errors.hpp"
#include "rank1lab/joining.hpp"
#include "rank1lab/pairs.hpp"
#include "rank1lab/reduction.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace rank1lab {

namespace {

struct Lab {
    const CampaignConfig& cfg;
    Schedule s;
    Tables tb;
    Space sp;
    Measure me;
    Numeration nm;

    explicit Lab(const CampaignConfig& c)
        : cfg(c), s(schedule_from_config(c.schedule)), tb(compute_tables(s)), sp(s, tb), me(sp), nm(s, tb) {}

    Rng stream(uint64_t id) const { return Rng(cfg.seed, id); }

    // unbounded indices whose scale lies strictly below K
    int inner_unbounded() const {
        int k = 0;
        while (k + 1 <= s.count() && s.a(k + 1) < tb.K) ++k;
        return k;
    }

    // shared computations, built once whichever check asks first
    std::once_flag traces_once, pj_once, ce_once;
    std::vector<TraceReport> traces;
    std::string traces_note;
    std::vector<PJReport> pj;
    CEReport ce;
};

using CheckFn = std::function<CheckResult(Lab&, Rng&)>;

CheckResult result(Verdict v, long long tested, long long failures, std::string detail) {
    return {"", v, tested, failures, std::move(detail)};
}

Verdict worst(Verdict a, Verdict b) {
    if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
    if (a == Verdict::Pass || b == Verdict::Pass) return Verdict::Pass;
    return Verdict::Inconclusive;
}

CheckResult from_lemmas(const LemmaReport& rep, const std::vector<std::string>& names) {
    CheckResult r = result(Verdict::Inconclusive, 0, 0, "");
    for (const auto& l : rep.lines) {
        if (!names.empty() && std::find(names.begin(), names.end(), l.lemma) == names.end()) continue;
        r.tested += l.tested;
        r.failures += l.failures;
        if (l.failures && r.detail.empty()) r.detail = l.lemma + ": " + l.witness;
    }
    r.verdict = r.failures ? Verdict::Fail : (r.tested ? Verdict::Pass : Verdict::Inconclusive);
    return r;
}

CheckResult from_property(const std::vector<PropertyLine>& lines, const std::string& name, const std::string& scope) {
    for (const auto& l : lines)
        if (l.name == name) return result(l.holds ? Verdict::Pass : Verdict::Fail, 1, !l.holds, scope + (l.witness.empty() ? "" : " " + l.witness));
    return result(Verdict::Inconclusive, 0, 0, "no line " + name);
}

int scope_a3(const Lab& L) {
    long long a3 = L.s.count() >= 3 ? L.s.a(3) : L.tb.K;
    return static_cast<int>(std::min<long long>(a3, L.tb.K));
}

// digits at unbounded scales >= lo only, leading scale Jm
Int structured(const Lab& L, Rng& rng, int Jm, long long lo, long long emax, bool zeros = false) {
    Int m = 0;
    for (int j = L.s.index_of(Jm); j >= 1 && L.s.a(j) >= lo; --j) {
        long long e = 1 + static_cast<long long>(rng.below(static_cast<uint64_t>(std::min(emax, L.s.d(j)))));
        if (L.s.a(j) != Jm && rng.below(2)) e = -e;
        // a zero digit lets one reduction skip a level
        if (L.s.a(j) != Jm && zeros && rng.below(3) == 0) e = 0;
        m += Int(e) * L.tb.p[static_cast<size_t>(L.s.a(j))];
    }
    return rng.below(2) ? Int(-m) : m;
}

void build_traces(Lab& L) {
    int top = L.inner_unbounded();
    if (top < 2) {
        L.traces_note = "needs two unbounded scales below K";
        return;
    }
    Rng rng = L.stream(1001);
    int Jm = static_cast<int>(L.s.a(top));
    int tau = static_cast<int>(L.s.a(1));
    ReductionOptions o;
    o.tau_floor = tau;
    for (int i = 0; i < L.cfg.instances; ++i) {
        Int m = structured(L, rng, Jm, tau, 8, true);
        auto tr = reduce_trace(L.nm, m, tau, o);
        L.traces.push_back(verify_trace(L.me, L.nm, tr, L.cfg.samples, rng));
    }
}

CheckFn trace_check(std::vector<std::string> names, bool measure = false) {
    return [names, measure](Lab& L, Rng&) {
        std::call_once(L.traces_once, [&] { build_traces(L); });
        if (L.traces.empty()) return result(Verdict::Inconclusive, 0, 0, L.traces_note);
        CheckResult r = result(Verdict::Inconclusive, 0, 0, "");
        for (const auto& t : L.traces) {
            CheckResult one = from_lemmas(t.lines, names);
            r.tested += one.tested;
            r.failures += one.failures;
            if (r.detail.empty()) r.detail = one.detail;
            if (measure)
                for (size_t i = 0; i < t.e4_measure.size(); ++i)
                    if (t.e4_measure[i] == Verdict::Fail) {
                        ++r.failures;
                        if (r.detail.empty()) r.detail = "E4 measure below floor at level " + std::to_string(i + 1);
                    }
        }
        r.verdict = r.failures ? Verdict::Fail : (r.tested ? Verdict::Pass : Verdict::Inconclusive);
        if (r.detail.empty()) r.detail = std::to_string(L.traces.size()) + " traces";
        return r;
    };
}

CheckResult from_pj_lines(const std::vector<const PJLine*>& lines) {
    CheckResult r = result(Verdict::Inconclusive, 0, 0, "");
    for (const PJLine* l : lines) {
        r.verdict = worst(r.verdict, l->verdict);
        r.tested += l->tested;
        r.failures += l->failures;
        if (l->verdict == Verdict::Fail && r.detail.empty()) r.detail = l->detail;
    }
    if (r.verdict == Verdict::Fail && r.failures == 0) r.failures = 1;
    if (r.detail.empty() && !lines.empty()) r.detail = lines.back()->detail;
    return r;
}

CheckFn pj_check(std::string name) {
    return [name](Lab& L, Rng&) {
        std::call_once(L.pj_once, [&] {
            Rng rng = L.stream(1002);
            PJOptions o;
            o.samples = L.cfg.samples;
            for (int k = 1; k <= L.inner_unbounded(); ++k) L.pj.push_back(joining_prep(L.me, k, rng, o));
        });
        if (L.pj.empty()) tower_sets(L.sp, 1);  // raises the reason
        std::vector<const PJLine*> lines;
        for (const auto& rep : L.pj) lines.push_back(&rep.line(name));
        return from_pj_lines(lines);
    };
}

CheckFn ce_check(std::vector<std::string> names) {
    return [names](Lab& L, Rng&) {
        std::call_once(L.ce_once, [&] {
            Rng rng = L.stream(1003);
            CEOptions o;
            o.samples = L.cfg.samples;
            o.kr_samples = 2 * L.cfg.samples;
            o.depth = L.cfg.depth;
            o.pj.samples = L.cfg.samples;
            int hi = L.inner_unbounded();
            if (hi < 1) {
                tower_sets(L.sp, 1);
                return;
            }
            L.ce = check_prop_ce_hypotheses(L.me, 1, hi, rng, o);
        });
        std::vector<const PJLine*> lines;
        for (const auto& l : L.ce.lines)
            if (std::find(names.begin(), names.end(), l.name) != names.end()) lines.push_back(&l);
        if (lines.empty()) return result(Verdict::Inconclusive, 0, 0, "no joining hypotheses evaluated");
        return from_pj_lines(lines);
    };
}

std::vector<Int> pair_times(const Lab& L, PhiMode mode) {
    std::vector<Int> out;
    auto at = [&](int J, const Rat& frac, int sign) {
        Rat v = frac * L.tb.p[static_cast<size_t>(J)];
        Int r = Int(numerator(v) / denominator(v)) * sign;
        if (L.nm.scale(r) == J) out.push_back(r);
    };
    for (int sign : {1, -1}) {
        if (mode == PhiMode::Bounded) {
            int taken = 0;
            for (int J = 2; J + 1 <= L.tb.K && taken < 6; ++J) {
                if (L.s.unbounded(J) || L.s.unbounded(J + 1)) continue;
                at(J, Rat(6, 10), sign);
                at(J, Rat(8, 10), sign);
                ++taken;
            }
        } else {
            for (int j = 2; j <= L.s.count() && L.s.a(j) + 1 <= L.tb.K; ++j) {
                int J = static_cast<int>(L.s.a(j));
                if (mode == PhiMode::Small) {
                    at(J, Rat(55, 100), sign);
                    at(J, Rat(6, 10), sign);
                } else {
                    at(J, Rat(3), sign);
                    at(J, Rat(5), sign);
                }
            }
        }
    }
    return out;
}

CheckResult friendly_buddy(Lab& L, Rng& rng) {
    std::vector<std::pair<PhiMode, Int>> runs;
    for (PhiMode m : {PhiMode::Bounded, PhiMode::Small, PhiMode::SmallE})
        for (const Int& r : pair_times(L, m)) runs.push_back({m, r});
    if (runs.empty()) return result(Verdict::Inconclusive, 0, 0, "no admissible times");
    long long per = std::max<long long>(1, L.cfg.samples / static_cast<long long>(runs.size()) + 1);
    long long pairs = 0, bad = 0, used = 0;
    std::string detail;
    for (auto& [mode, r] : runs) {
        PhiMap phi;
        try {
            phi = phi_map(mode, L.sp, L.nm, r);
        } catch (const PreconditionViolated&) {
            continue;
        }
        PhiReport rep = run_phi(L.me, phi, per, rng);
        ++used;
        pairs += rep.friendly;
        long long b = rep.not_friendly + (rep.friendly - rep.buddy_unit);
        bad += b;
        if (b && detail.empty()) detail = std::string(to_string(mode)) + " r=" + str(r) + " " + rep.first_failure;
    }
    if (detail.empty()) detail = std::to_string(used) + " times, unit buddy witness on every pair";
    return result(bad ? Verdict::Fail : (pairs ? Verdict::Pass : Verdict::Inconclusive), pairs, bad, detail);
}

CheckResult corollaries(Lab& L, Rng& rng) {
    LemmaReport all;
    long long times = 0;
    for (int n = 1; n <= L.s.count(); ++n) {
        int J = static_cast<int>(L.s.a(n));
        if (J + 2 > L.tb.K) break;
        long long big = std::min<long long>(13, (L.s.c(J) + 1) / 2 - 1);
        for (int sign : {1, -1})
            for (auto [lst, off] : {std::pair<long long, int>{big, 101}, {4, 3}}) {
                Int r = Int(lst) * L.tb.p[static_cast<size_t>(J)] * sign + off * sign;
                if (L.nm.scale(r) != J) continue;
                LemmaReport rep = check_reduction_corollaries(L.me, L.nm, r, std::max<long long>(10, L.cfg.samples / 8), rng);
                for (const auto& l : rep.lines) {
                    auto& t = all.line(l.lemma);
                    t.tested += l.tested;
                    t.skipped += l.skipped;
                    if (l.failures && !t.failures) t.witness = l.witness;
                    t.failures += l.failures;
                }
                ++times;
            }
    }
    if (!times) return result(Verdict::Inconclusive, 0, 0, "no unbounded scale with two finer scales materialized");
    return from_lemmas(all, {});
}

CheckResult multiples(Lab& L, Rng& rng) {
    int top = L.inner_unbounded();
    if (top < 2) return result(Verdict::Inconclusive, 0, 0, "needs two unbounded scales below K");
    int Jm = static_cast<int>(L.s.a(top));
    int tau = static_cast<int>(L.s.a(1));
    ReductionOptions o;
    o.tau_floor = tau;
    long long runs = 0, bad = 0;
    std::string detail;
    for (int t = 0; t < 4 * L.cfg.instances && runs < L.cfg.instances; ++t) {
        Int m = structured(L, rng, Jm, tau, 4);
        long long s = 1 + static_cast<long long>(rng.below(7));
        if (!L.s.unbounded(L.nm.scale(Int(s) * m)) || Int(s) > multiplier_bound(L.nm, m)) continue;
        auto rep = verify_multiples(L.me, L.nm, m, tau, s, o);
        ++runs;
        if (!rep.ok()) {
            ++bad;
            if (detail.empty()) detail = "m=" + str(m) + " s=" + std::to_string(s);
        }
    }
    if (detail.empty()) detail = std::to_string(runs) + " (m, s) pairs";
    return result(bad ? Verdict::Fail : (runs ? Verdict::Pass : Verdict::Inconclusive), runs, bad, detail);
}

CheckResult kr_metric(Lab& L, Rng& rng) {
    auto random_joining = [&](int depth) {
        EmpiricalJoining e;
        e.depth = depth;
        int n = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < n; ++i) {
            Prefix x(static_cast<size_t>(depth)), y(static_cast<size_t>(depth));
            for (auto& v : x) v = static_cast<long long>(rng.below(3));
            for (auto& v : y) v = static_cast<long long>(rng.below(3));
            e.atoms[{x, y}] += Rat(1 + static_cast<long long>(rng.below(20)));
        }
        Rat tot = e.total();
        for (auto& [c, w] : e.atoms) w /= tot;
        return e;
    };
    long long bad = 0;
    for (long long t = 0; t < L.cfg.samples; ++t) {
        int depth = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, L.cfg.depth))));
        auto a = random_joining(depth), b = random_joining(depth), c = random_joining(depth);
        Rat ab = kr_distance(a, b);
        bool ok = ab == kr_distance(b, a) && ab <= kr_distance(a, c) + kr_distance(c, b) && kr_distance(a, a) == 0 &&
                  ((ab == 0) == (a.atoms == b.atoms));
        bad += !ok;
    }
    return result(bad ? Verdict::Fail : Verdict::Pass, L.cfg.samples, bad, "symmetry, triangle, identity");
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> reg = {
        {"lemma-2.1",
         [](Lab& L, Rng&) {
             int K = scope_a3(L);
             MassInterval m = removed_mass(L.s, L.tb, K);
             return result(m.below_eighth ? Verdict::Pass : Verdict::Fail, 1, !m.below_eighth,
                           "removed mass in [" + approx(m.lower, 6) + ", " + approx(m.upper, 6) + "] through " +
                               std::to_string(K));
         }},
        {"lemma-2.7",
         [](Lab& L, Rng&) {
             int N = scope_a3(L);
             return from_property(verify_standing_inequalities(L.s, L.tb, N), "lemma-2.7", "n <= " + std::to_string(N));
         }},
        {"pn_bound",
         [](Lab& L, Rng&) {
             int N = scope_a3(L);
             return from_property(verify_standing_inequalities(L.s, L.tb, N), "pn_bound", "n <= " + std::to_string(N));
         }},
        {"P1",
         [](Lab& L, Rng&) {
             int n = std::min(3, L.s.count() - 1);
             return from_property(verify_p_properties(L.s, L.tb, 1, n), "P1", "n <= " + std::to_string(n));
         }},
        {"P2",
         [](Lab& L, Rng&) {
             int n = std::min(3, L.s.count() - 1);
             return from_property(verify_p_properties(L.s, L.tb, 1, n), "P2", "n <= " + std::to_string(n));
         }},
        {"expansion",
         [](Lab& L, Rng&) {
             long long bad = 0, n = 0;
             std::string w;
             for (long long v = -L.cfg.samples; v <= L.cfg.samples; ++v, ++n) {
                 TowerExpansion e = L.nm.expand(Int(v));
                 bool ok = e.reconstruct(L.tb) == v;
                 for (int j = 1; j <= e.J; ++j) ok = ok && 2 * std::abs(e.e[static_cast<size_t>(j)]) <= L.s.c(j) + 1;
                 if (!ok && bad++ == 0) w = "r=" + std::to_string(v);
             }
             return result(bad ? Verdict::Fail : Verdict::Pass, n, bad, w.empty() ? "|r| <= " + std::to_string(L.cfg.samples) : w);
         }},
        {"reduction-lemmas",
         [](Lab& L, Rng&) { return from_lemmas(verify_reduction_lemmas_range(L.nm, Int(-L.cfg.samples), Int(L.cfg.samples)), {}); }},
        {"cylinder-lemmas",
         [](Lab& L, Rng&) {
             auto r = verify_cylinder_lemmas(L.me, std::min(3, L.tb.K));
             long long f = r.decay_failures + r.size_failures;
             return result(f ? Verdict::Fail : Verdict::Pass, r.cylinders, f, r.witness);
         }},
        {"tower",
         [](Lab& L, Rng& rng) {
             long long bad = 0, lv = 0;
             int n = 1;
             for (; n <= L.s.count() && L.s.a(n) <= L.tb.K; ++n) {
                 TowerReport t = rank_one_tower(L.me, n, L.cfg.samples, rng);
                 lv += t.level_checks;
                 bad += t.level_mismatches + !t.base_survives + !t.h_below_t;
             }
             if (n == 1) return result(Verdict::Inconclusive, 0, 0, "no unbounded scale materialized");
             return result(bad ? Verdict::Fail : Verdict::Pass, lv, bad, std::to_string(n - 1) + " towers");
         }},
        {"rigidity",
         [](Lab& L, Rng& rng) {
             long long bad = 0, tested = 0;
             std::ostringstream os;
             for (int n = std::max(1, L.tb.K - 1); n <= L.tb.K; ++n) {
                 auto r = partial_rigidity(L.sp, n, L.cfg.samples, rng);
                 tested += r.samples;
                 bad += r.fraction < 1.0 / 9 - 0.02;
                 os << "n=" << n << ":" << std::setprecision(4) << r.fraction << " ";
             }
             return result(bad ? Verdict::Fail : Verdict::Pass, tested, bad, os.str() + "floor 1/9 - 0.02");
         }},
        {"weak-mixing",
         [](Lab& L, Rng& rng) {
             long long bad = 0, tested = 0, ks = 0;
             for (int k = 2; k <= L.tb.K; ++k) {
                 if (L.s.unbounded(k) || L.s.unbounded(k - 1)) continue;
                 auto r = weak_mixing_sets(L.me, k, std::max<long long>(10, L.cfg.samples / 10), rng);
                 tested += r.a_tested + r.b_tested;
                 bad += r.a_far + r.b_far;
                 ++ks;
             }
             return result(bad ? Verdict::Fail : (tested ? Verdict::Pass : Verdict::Inconclusive), tested, bad,
                           std::to_string(ks) + " bounded k");
         }},
        {"friendly-buddy", friendly_buddy},
        {"corollaries", corollaries},
        {"E1", trace_check({"E1"})},
        {"E2", trace_check({"E2-partition", "E2-scales"})},
        {"E3", trace_check({"E3"})},
        {"E4", trace_check({"E4-buddies", "E4-comparable"}, true)},
        {"E5", trace_check({"E5"})},
        {"E6", trace_check({"E6"})},
        {"E7", trace_check({"E7"})},
        {"multiples", multiples},
        {"PJ1", pj_check("PJ1")},
        {"PJ2", pj_check("PJ2")},
        {"PJ3", pj_check("PJ3")},
        {"PJ4", pj_check("PJ4")},
        {"PJ5", pj_check("PJ5")},
        {"PJ6", pj_check("PJ6")},
        {"PJ7", pj_check("PJ7")},
        {"PJ8", pj_check("PJ8")},
        {"J1", ce_check({"J1"})},
        {"J2", ce_check({"J2"})},
        {"J3", ce_check({"J3"})},
        {"J4", ce_check({"J4"})},
        {"J5", ce_check({"J5"})},
        {"J6", ce_check({"J6", "J6-agree"})},
        {"J7", ce_check({"J7", "J7-alpha", "J7-gamma"})},
        {"joining-relations",
         [](Lab& L, Rng&) {
             int kmax = L.s.paper_formula() ? 20 : L.s.count();
             PQSeq pq = unbounded_heights(L.s, kmax);
             int bad = check_joining_relations(pq, joining_times(pq, kmax), kmax);
             return result(bad ? Verdict::Fail : Verdict::Pass, kmax, bad != 0,
                           bad ? "first failure at k=" + std::to_string(bad) : "k <= " + std::to_string(kmax));
         }},
        {"kr-metric", kr_metric},
        {"bary",
         [](Lab& L, Rng& rng) {
             BaryOptions o;
             o.trials = L.cfg.samples;
             auto r = bary_recursion_check(o, rng);
             return result(r.ok() ? Verdict::Pass : Verdict::Fail, r.checks, r.violations, r.text().substr(0, r.text().size() - 1));
         }},
        {"cauchy",
         [](Lab& L, Rng& rng) {
             int hi = L.inner_unbounded();
             if (hi < 1) tower_sets(L.sp, 1);
             auto c = joining_cauchy(L.sp, hi, L.cfg.samples, L.cfg.depth, rng);
             bool ok = c.monotone && c.far_from_product;
             return result(ok ? Verdict::Pass : Verdict::Fail, static_cast<long long>(c.d_alpha.size()), !ok,
                           std::string("monotone=") + (c.monotone ? "yes" : "no") + " mid vs product " +
                               approx(c.mid_vs_product, 4) + " noise " + approx(c.mid_noise, 4));
         }},
        {"mixing",
         [](Lab& L, Rng& rng) {
             auto prof = mixing_profile(L.sp, L.cfg.samples, rng);
             long long bad = 0;
             double lo = 1;
             int at = 0;
             for (auto& p : prof) {
                 bad += p.value < 0.05;
                 if (p.value < lo) {
                     lo = p.value;
                     at = p.k;
                 }
             }
             std::ostringstream os;
             os << "min " << std::setprecision(4) << lo << " at k=" << at << ", floor 0.05";
             return result(bad ? Verdict::Fail : Verdict::Pass, static_cast<long long>(prof.size()), bad, os.str());
         }},
    };
    return reg;
}

}  // namespace

const std::vector<std::string>& check_manifest() {
    static const std::vector<std::string> ids = {
        "lemma-2.1", "lemma-2.7", "pn_bound", "P1", "P2", "expansion", "reduction-lemmas", "cylinder-lemmas",
        "tower", "rigidity", "weak-mixing", "friendly-buddy", "corollaries", "E1", "E2", "E3", "E4", "E5", "E6",
        "E7", "multiples", "PJ1", "PJ2", "PJ3", "PJ4", "PJ5", "PJ6", "PJ7", "PJ8", "J1", "J2", "J3", "J4", "J5",
        "J6", "J7", "joining-relations", "kr-metric", "bary", "cauchy", "mixing"};
    return ids;
}

std::vector<std::string> unbound_checks() {
    std::vector<std::string> out;
    for (const auto& id : check_manifest()) {
        auto& reg = registry();
        if (std::none_of(reg.begin(), reg.end(), [&](const auto& e) { return e.first == id; })) out.push_back(id);
    }
    return out;
}

std::string CampaignReport::json() const {
    nlohmann::ordered_json j;
    j["schedule"] = schedule;
    j["seed"] = seed;
    j["rng"] = rng;
    j["samples"] = samples;
    j["depth"] = depth;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& r : results)
        j["checks"].push_back({{"id", r.id},
                               {"verdict", to_string(r.verdict)},
                               {"tested", r.tested},
                               {"failures", r.failures},
                               {"detail", r.detail}});
    j["exit"] = exit_code();
    return j.dump(2) + "\n";
}

std::string CampaignReport::text() const {
    std::ostringstream os;
    os << "schedule " << schedule << "  seed " << seed << "  rng " << rng << "\n";
    for (const auto& r : results)
        os << std::left << std::setw(18) << r.id << std::setw(13) << to_string(r.verdict) << "tested=" << std::setw(9)
           << r.tested << "failures=" << std::setw(6) << r.failures << r.detail << "\n";
    return os.str();
}

int CampaignReport::exit_code() const {
    bool inc = false;
    for (const auto& r : results) {
        if (r.verdict == Verdict::Fail) return 1;
        inc = inc || r.verdict == Verdict::Inconclusive;
    }
    return inc ? 2 : 0;
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
    if (cfg.rng != Rng::algorithm) throw ConfigError("rng: unsupported algorithm '" + cfg.rng + "'");
    if (cfg.samples < 1) throw ConfigError("samples: must be positive");
    if (cfg.depth < 1) throw ConfigError("depth: must be positive");
    if (cfg.instances < 1) throw ConfigError("instances: must be positive");
    auto missing = unbound_checks();
    if (!missing.empty()) throw ConfigError("manifest: no operation bound to " + missing.front());
    const auto& reg = registry();
    std::vector<size_t> which;
    for (const auto& id : cfg.checks) {
        auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == id; });
        if (it == reg.end()) throw ConfigError("checks: unknown check id '" + id + "'");
        which.push_back(static_cast<size_t>(it - reg.begin()));
    }
    CampaignReport rep;
    rep.seed = cfg.seed;
    rep.rng = cfg.rng;
    rep.samples = cfg.samples;
    rep.depth = cfg.depth;
    rep.results.resize(which.size());
    if (which.empty()) {
        rep.schedule = schedule_from_config(cfg.schedule).name();
        return rep;
    }
    Lab L(cfg);
    rep.schedule = L.s.name();
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next++) < which.size();) {
            const auto& [id, fn] = reg[which[i]];
            Rng rng = L.stream(which[i] + 1);
            CheckResult r;
            try {
                r = fn(L, rng);
            } catch (const Error& e) {
                r = result(Verdict::Inconclusive, 0, 0, e.what());
            }
            r.id = id;
            rep.results[i] = std::move(r);
        }
    };
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n = std::min<int>(n, static_cast<int>(which.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rep;
}

}  // namespace rank1lab
