#include "rank1lab/schedule.hpp"

#include "rank1lab/errors.hpp"

#include <algorithm>
#include <sstream>

namespace rank1lab {

namespace {

std::vector<long long> parse_list(const std::string& v, const std::string& key) {
    std::string s = v;
    s.erase(std::remove_if(s.begin(), s.end(), [](char ch) { return ch == ' ' || ch == '\t'; }), s.end());
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError(key + ": expected [..] list, got '" + v + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<long long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            size_t used = 0;
            out.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(key + ": bad list element '" + item + "'");
        }
    }
    return out;
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

Schedule Schedule::build(const ScheduleSpec& spec) {
    Schedule s;
    s.spec_ = spec;
    if (spec.max_scale < 1) throw InvalidSchedule("max_scale must be >= 1");
    if (spec.paper_formula) {
        for (int j = 1; j <= 40; ++j) {
            s.a_.push_back(1LL << (j + 5));
            s.d_.push_back(1LL << (j + 5));
        }
        s.spec_.a.clear();
        s.spec_.d.clear();
        return s;
    }
    if (spec.a.size() != spec.d.size())
        throw InvalidSchedule("a and d must have equal length");
    for (size_t j = 0; j < spec.a.size(); ++j) {
        if (j == 0 && spec.a[0] < 2) throw InvalidSchedule("a(1) must be >= 2");
        if (j > 0 && spec.a[j] < spec.a[j - 1] + 2)
            throw InvalidSchedule("a(" + std::to_string(j + 1) + ") must exceed a(" +
                                  std::to_string(j) + ") by at least 2");
        // d >= 7 keeps [7^(k-1) 8] inside Y_(k-1) at every bounded k
        if (spec.removals && spec.d[j] < 7)
            throw InvalidSchedule("d(" + std::to_string(j + 1) + ") must be >= 7");
        if (spec.d[j] < 1) throw InvalidSchedule("d must be positive");
    }
    s.a_ = spec.a;
    s.d_ = spec.d;
    return s;
}

Schedule Schedule::paper(int max_scale) {
    ScheduleSpec sp;
    sp.name = "paper";
    sp.paper_formula = true;
    sp.max_scale = max_scale;
    return build(sp);
}

std::vector<std::string> Schedule::preset_names() {
    return {"paper", "desk", "mini", "sweep", "lab"};
}

Schedule Schedule::preset(const std::string& name) {
    if (name == "paper") return paper();
    ScheduleSpec sp;
    sp.name = name;
    if (name == "desk") {
        sp.a = {6, 12, 18};
        sp.d = {8, 16, 32};
        sp.max_scale = 20;
    } else if (name == "mini") {
        // t(5) = 612000: small enough for full-cycle enumeration
        sp.a = {3, 5};
        sp.d = {8, 16};
        sp.max_scale = 5;
    } else if (name == "sweep") {
        sp.a = {2, 6, 11};
        sp.d = {8, 12, 16};
        sp.max_scale = 13;
    } else if (name == "lab") {
        sp.a = {4, 8, 13, 19, 26};
        sp.d = {16, 32, 64, 128, 256};
        sp.max_scale = 28;
    } else {
        throw ConfigError("preset: unknown preset '" + name + "'");
    }
    return build(sp);
}

Schedule Schedule::with_max_scale(int K) const {
    ScheduleSpec sp = spec_;
    sp.max_scale = K;
    return build(sp);
}

int Schedule::index_of(long long n) const {
    auto it = std::lower_bound(a_.begin(), a_.end(), n);
    if (it != a_.end() && *it == n) return static_cast<int>(it - a_.begin()) + 1;
    return 0;
}

long long Schedule::c(long long n) const {
    int j = index_of(n);
    return j ? 2 * d_[j - 1] + 1 : 9;
}

long long Schedule::a(int j) const {
    if (j < 1 || j > count()) throw PreconditionViolated("unbounded index " + std::to_string(j) + " not defined");
    return a_[j - 1];
}

long long Schedule::d(int j) const {
    if (j < 1 || j > count()) throw PreconditionViolated("unbounded index " + std::to_string(j) + " not defined");
    return d_[j - 1];
}

int Schedule::count_upto(long long n) const {
    return static_cast<int>(std::upper_bound(a_.begin(), a_.end(), n) - a_.begin());
}

long long Schedule::lambda(long long s) const {
    int j = count_upto(s - 1);
    // below a(1) there is no unbounded scale to return; a(1) itself has none below it
    if (j == 0) throw PreconditionViolated("lambda(" + std::to_string(s) + ") undefined: no unbounded scale below");
    return a_[j - 1];
}

Int Tables::P(int j) const {
    long long n = sched->a(j);
    if (n > K + 1) throw ScaleOverflow("P(" + std::to_string(j) + ") beyond materialized scales");
    return p[n];
}

Int Tables::Q(int j) const {
    long long n = sched->a(j);
    if (n > K) throw ScaleOverflow("Q(" + std::to_string(j) + ") beyond materialized scales");
    return q[n];
}

int Tables::max_unbounded() const { return sched->count_upto(K); }

Tables compute_tables(const Schedule& s, int N) {
    if (N < 0) N = s.K();
    if (N > s.K()) throw PreconditionViolated("N exceeds max_scale");
    Tables tb;
    tb.sched = &s;
    tb.K = N;
    tb.t.assign(N + 1, Int(0));
    tb.p.assign(N + 2, Int(0));
    tb.q.assign(N + 1, Int(0));
    tb.removed.assign(N + 1, Int(0));
    tb.t[0] = 1;
    tb.p[1] = 1;
    Int Qprev = 0, Pprev = 0;
    for (int n = 1; n <= N; ++n) {
        long long c = s.c(n);
        tb.t[n] = tb.t[n - 1] * (c + 1);
        int j = s.index_of(n);
        if (!s.removals()) {
            tb.removed[n] = 0;
        } else if (j) {
            Int Qj = (j == 1) ? Int(1) : Int(2 * Pprev - Qprev);
            tb.q[n] = Qj;
            tb.removed[n] = Qj * ((c + 1) / 2);
            Qprev = Qj;
            Pprev = tb.p[n];
        } else {
            tb.removed[n] = 1;
        }
        tb.p[n + 1] = tb.p[n] * (c + 1) - tb.removed[n];
    }
    return tb;
}

PQSeq unbounded_heights(const Schedule& s, int kmax) {
    if (kmax > s.count()) throw ScaleOverflow("unbounded index beyond schedule");
    if (!s.removals()) throw PreconditionViolated("heights need removals");
    PQSeq out;
    out.P.assign(kmax + 1, Int(0));
    out.Q.assign(kmax + 1, Int(0));
    auto run = [](const Int& start, unsigned long steps) {
        Int ten = pow10(steps);
        return Int(ten * start - (ten - 1) / 9);
    };
    out.P[1] = run(Int(1), static_cast<unsigned long>(s.a(1) - 1));
    out.Q[1] = 1;
    for (int j = 1; j < kmax; ++j) {
        long long dj = s.d(j);
        Int after = Int(2 * (dj + 1)) * out.P[j] - Int(dj + 1) * out.Q[j];
        out.P[j + 1] = run(after, static_cast<unsigned long>(s.a(j + 1) - s.a(j) - 1));
        out.Q[j + 1] = 2 * out.P[j] - out.Q[j];
    }
    return out;
}

MassInterval removed_mass(const Schedule& s, const Tables& tb, int K) {
    MassInterval m;
    if (K > tb.K) throw PreconditionViolated("K beyond materialized scales");
    if (!s.removals()) {
        m.lower = m.upper = 0;
        m.below_eighth = true;
        m.exact = true;
        return m;
    }
    if (s.count() == 0 || K < s.a(1))
        throw TailBoundUnavailable("truncation K=" + std::to_string(K) + " precedes a(1)");
    for (int k = 1; k <= K; ++k) m.lower += Rat(tb.removed[k], tb.t[k]);
    if (s.finite()) {
        // everything past K that exists is finite and exact
        m.upper = m.lower;
        for (int k = K + 1; k <= tb.K; ++k) m.upper += Rat(tb.removed[k], tb.t[k]);
        m.exact = (K == tb.K);
    } else {
        Rat tail = Rat(Int(1), Int(9) * tb.t[K]);
        int n0 = s.count_upto(K) + 1;
        long long a0 = s.a(n0), aprev = s.a(n0 - 1);
        tail += Rat(tb.P(n0 - 1), tb.t[K] * pow10(static_cast<unsigned long>(a0 - 1 - K)));
        long long g = s.a(n0 + 1) - a0 - 1;
        (void)aprev;
        tail += Rat(Int(10), Int(9) * pow10(static_cast<unsigned long>(g)) * (2 * s.d(n0) + 2));
        m.upper = m.lower + tail;
    }
    m.below_eighth = m.upper < Rat(1, 8);
    return m;
}

std::vector<PropertyLine> verify_p_properties(const Schedule& s, const Tables& tb, int n_lo, int n_hi) {
    std::vector<PropertyLine> out;
    PropertyLine p1{"P1", true, ""}, p2{"P2", true, ""};
    Rat sum = 0;
    for (int n = n_lo; n <= n_hi; ++n) {
        long long an = s.a(n);
        if (!(tb.P(n) <= tb.t.at(an - 1))) {
            p1.holds = false;
            p1.witness = "n=" + std::to_string(n);
        }
        sum += Rat(tb.P(n), tb.P(n + 1));
    }
    p2.holds = sum < Rat(1, 100000);
    p2.witness = n_lo > n_hi ? "empty" : "sum=" + approx(sum, 8);
    if (p1.holds) p1.witness = n_lo > n_hi ? "empty" : "n=" + std::to_string(n_lo) + ".." + std::to_string(n_hi);
    out.push_back(p1);
    out.push_back(p2);
    return out;
}

std::vector<PropertyLine> verify_standing_inequalities(const Schedule& s, const Tables& tb, int N) {
    PropertyLine pn{"pn_bound", true, ""}, l27{"lemma-2.7", true, ""};
    for (int n = 1; n <= N; ++n) {
        long long c = s.c(n);
        if (!((c + 1) * tb.p[n] <= tb.t[n])) {
            pn.holds = false;
            pn.witness = "n=" + std::to_string(n);
        }
        // ((c+1)/2 + 1) p(n) <= p(n+1)
        if (!(Int((c + 1) / 2 + 1) * tb.p[n] <= tb.p[n + 1])) {
            l27.holds = false;
            l27.witness = "n=" + std::to_string(n);
        }
    }
    return {pn, l27};
}

std::string tables_csv(const Schedule& s, const Tables& tb) {
    std::ostringstream os;
    os << "n,c,t,p,q,removed\n";
    for (int n = 1; n <= tb.K; ++n)
        os << n << ',' << s.c(n) << ',' << tb.t[n] << ',' << tb.p[n] << ',' << tb.q[n] << ','
           << tb.removed[n] << '\n';
    return os.str();
}

Schedule schedule_from_config(const std::map<std::string, std::string>& kv) {
    auto it = kv.find("preset");
    Schedule base;
    ScheduleSpec sp;
    bool have_preset = it != kv.end();
    if (have_preset) {
        base = Schedule::preset(unquote(it->second));
        sp = base.spec();
    }
    if (kv.count("a") || kv.count("d")) {
        if (!kv.count("a") || !kv.count("d")) throw ConfigError("a/d: both lists are required");
        sp.a = parse_list(kv.at("a"), "a");
        sp.d = parse_list(kv.at("d"), "d");
        sp.paper_formula = false;
        sp.name = "custom";
        if (!kv.count("max_scale") && !sp.a.empty()) sp.max_scale = static_cast<int>(sp.a.back()) + 2;
    } else if (!have_preset) {
        throw ConfigError("preset: no preset and no a/d lists");
    }
    if (kv.count("removals")) {
        std::string v = unquote(kv.at("removals"));
        if (v != "true" && v != "false") throw ConfigError("removals: expected true/false");
        sp.removals = v == "true";
    }
    if (kv.count("max_scale")) {
        try {
            sp.max_scale = std::stoi(kv.at("max_scale"));
        } catch (const std::exception&) {
            throw ConfigError("max_scale: not an integer");
        }
    }
    if (sp.max_scale < 1) sp.max_scale = 10;
    try {
        return Schedule::build(sp);
    } catch (const InvalidSchedule& e) {
        throw ConfigError(std::string("a/d: ") + e.what());
    }
}

}  // namespace rank1lab
