#include "rank1lab/campaign.hpp"
#include "rank1lab/errors.hpp"
#include "rank1lab/joining.hpp"
#include "rank1lab/pairs.hpp"
#include "rank1lab/reduction.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace rank1lab;
using nlohmann::ordered_json;

namespace {

constexpr int kPass = 0, kFail = 1, kInconclusive = 2, kConfig = 3;

struct Globals {
    std::string preset = "desk";
    std::vector<long long> a, d;
    int max_scale = 0;
    uint64_t seed = 1;
    std::string rng = Rng::algorithm;
    int threads = 0;
    long long samples = 1000;
    int depth = 4;
    int instances = 10;
    std::vector<std::string> checks;
    std::string out;
};

std::string list_text(const std::vector<long long>& v) {
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "]";
}

std::map<std::string, std::string> schedule_keys(const Globals& g) {
    std::map<std::string, std::string> kv;
    if (!g.a.empty() || !g.d.empty()) {
        kv["a"] = list_text(g.a);
        kv["d"] = list_text(g.d);
        if (g.max_scale) kv["max_scale"] = std::to_string(g.max_scale);
    } else {
        kv["preset"] = g.preset;
        if (g.max_scale) kv["max_scale"] = std::to_string(g.max_scale);
    }
    return kv;
}

void emit(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("out: cannot write " + path);
    f << body;
}

Int int_arg(const std::string& key, const std::string& v) {
    try {
        return parse_int(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer '" + v + "'");
    }
}

// heavy objects built from the global schedule keys
struct World {
    Schedule s;
    Tables tb;
    Space sp;
    Measure me;
    Numeration nm;
    explicit World(const Globals& g)
        : s(schedule_from_config(schedule_keys(g))), tb(compute_tables(s)), sp(s, tb), me(sp), nm(s, tb) {}
};

int verdict_code(Verdict v) { return v == Verdict::Pass ? kPass : v == Verdict::Fail ? kFail : kInconclusive; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rank-one system laboratory"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file; lists as [a, b, c]");
    app.allow_config_extras(CLI::config_extras_mode::error);
    Globals g;
    app.add_option("--preset", g.preset, "schedule preset")->check(CLI::IsMember(Schedule::preset_names()));
    app.add_option("--a", g.a, "unbounded scales a(j)")->delimiter(',');
    app.add_option("--d", g.d, "d(j) at those scales")->delimiter(',');
    app.add_option("--max-scale,--max_scale", g.max_scale, "largest materialized scale K");
    app.add_option("--seed", g.seed, "RNG seed (RANK1LAB_SEED overrides the config value)");
    app.add_option("--rng", g.rng, "RNG algorithm; must be " + std::string(Rng::algorithm));
    app.add_option("--threads", g.threads, "worker threads for verify");
    app.add_option("--samples", g.samples, "sample count");
    app.add_option("--depth", g.depth, "prefix depth for joinings");
    app.add_option("--instances", g.instances, "reduction instances per campaign");
    app.add_option("--checks", g.checks, "check identifiers")->delimiter(',');
    app.add_option("--out", g.out, "output file (default stdout)");

    auto* seq = app.add_subcommand("sequences", "tables t, p, q and the joining times");
    int heights = 0;
    seq->add_option("--heights", heights, "also print P, Q, alpha, gamma for k <= this index");

    auto* exp = app.add_subcommand("expand", "tower expansion of r");
    std::string r_exp;
    exp->add_option("--r", r_exp, "integer")->required();

    auto* red = app.add_subcommand("reduce", "reduction trace of m down to tau");
    std::string m_arg;
    int tau = 0, tau_floor = -1;
    long long mult = 0;
    bool verify_red = false;
    red->add_option("--m", m_arg, "time m")->required();
    red->add_option("--tau", tau, "target scale")->required();
    red->add_option("--tau-floor", tau_floor, "smallest admissible tau");
    red->add_option("--multiplier", mult, "compare with the trace of s*m");
    red->add_flag("--verify", verify_red, "run the trace checks");

    auto* orb = app.add_subcommand("orbit", "T^r x, or (S|Y_b)^r x with --b");
    std::string x_arg, r_orb;
    int b_orb = 0;
    orb->add_option("--x", x_arg, "digits x(1),x(2),... (comma separated)")->required();
    orb->add_option("--r", r_orb, "power")->required();
    orb->add_option("--b", b_orb, "induce on Y_b instead of X");

    auto* prs = app.add_subcommand("pairs", "friendly pairs from a construction, as CSV certificates");
    std::string mode = "bounded", r_pairs;
    prs->add_option("--mode", mode, "bounded | small | small-e | boundary");
    prs->add_option("--r", r_pairs, "time r")->required();

    auto* jn = app.add_subcommand("joining", "tower sets at k and the empirical joining at alpha(k)");
    int kj = 1;
    std::string csv_out;
    jn->add_option("--k", kj, "unbounded index")->required();
    jn->add_option("--csv", csv_out, "write the empirical joining here");

    auto* ver = app.add_subcommand("verify", "verification campaign over --checks");
    bool text = false;
    ver->add_flag("--text", text, "print the aligned text report as well");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    bool seed_on_cli = false;
    for (int i = 1; i < argc; ++i) seed_on_cli = seed_on_cli || std::string(argv[i]).rfind("--seed", 0) == 0;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (const char* env = std::getenv("RANK1LAB_SEED"); env && !seed_on_cli) {
            try {
                g.seed = std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError(std::string("RANK1LAB_SEED: not an unsigned integer '") + env + "'");
            }
        }
        if (g.rng != Rng::algorithm) throw ConfigError("rng: unsupported algorithm '" + g.rng + "'");
        if (auto missing = unbound_checks(); !missing.empty()) {
            std::cerr << "manifest: no operation bound to " << missing.front() << "\n";
            return kConfig;
        }

        if (*ver) {
            CampaignConfig cfg;
            cfg.schedule = schedule_keys(g);
            for (const auto& c : g.checks)
                if (!c.empty()) cfg.checks.push_back(c);
            cfg.samples = g.samples;
            cfg.depth = g.depth;
            cfg.instances = g.instances;
            cfg.seed = g.seed;
            cfg.rng = g.rng;
            cfg.threads = g.threads;
            CampaignReport rep = run_campaign(cfg);
            if (g.out.empty()) {
                std::cout << rep.json();
            } else {
                emit(g.out, rep.json());
            }
            if (text || !g.out.empty()) std::cout << rep.text();
            return rep.exit_code();
        }

        World w(g);

        if (*seq) {
            std::string body = tables_csv(w.s, w.tb);
            if (heights > 0) {
                PQSeq pq = unbounded_heights(w.s, heights);
                JoiningTimes jt = joining_times(pq, heights);
                body += "\nk,P,Q,alpha,gamma\n";
                body += "0,,," + str(jt.alpha[0]) + "," + str(jt.gamma[0]) + "\n";
                for (int k = 1; k <= heights; ++k)
                    body += std::to_string(k) + "," + str(pq.P[k]) + "," + str(pq.Q[k]) + "," + str(jt.alpha[k]) + "," +
                            str(jt.gamma[k]) + "\n";
            }
            emit(g.out, body);
            return kPass;
        }

        if (*exp) {
            Int r = int_arg("r", r_exp);
            TowerExpansion e = w.nm.expand(r);
            ordered_json j = ordered_json::parse(e.json());
            j["lst"] = e.lst;
            j["unbounded"] = e.J > 0 && w.nm.unbounded_scale(r);
            if (j["unbounded"]) {
                j["L"] = str(w.nm.L(r));
                j["R"] = str(w.nm.R(r));
            }
            emit(g.out, j.dump(2) + "\n");
            return e.reconstruct(w.tb) == r ? kPass : kFail;
        }

        if (*red) {
            Int m = int_arg("m", m_arg);
            ReductionOptions o;
            o.tau_floor = tau_floor;
            if (mult) {
                MultiplesReport rep = verify_multiples(w.me, w.nm, m, tau, mult, o);
                emit(g.out, rep.tm.json());
                std::cout << rep.text();
                return rep.ok() ? kPass : kFail;
            }
            ReductionTrace tr = reduce_trace(w.nm, m, tau, o);
            emit(g.out, tr.json());
            if (!verify_red) return kPass;
            Rng rng(g.seed, 1);
            TraceReport rep = verify_trace(w.me, w.nm, tr, g.samples, rng);
            (g.out.empty() ? std::cerr : std::cout) << rep.text();
            return rep.ok() ? kPass : kFail;
        }

        if (*orb) {
            Word x = Word::parse(x_arg);
            Int r = int_arg("r", r_orb);
            Orbit o = b_orb ? w.sp.induced(x, b_orb, r) : w.sp.T(x, r);
            ordered_json j;
            j["x"] = x.str();
            j["r"] = str(r);
            if (b_orb) j["b"] = b_orb;
            j["y"] = o.y.str();
            j["stime"] = str(o.stime);
            j["tail_known"] = o.y.tail_known;
            emit(g.out, j.dump(2) + "\n");
            return kPass;
        }

        if (*prs) {
            Int r = int_arg("r", r_pairs);
            PhiMode pm;
            try {
                pm = parse_phi_mode(mode);
            } catch (const Error&) {
                throw ConfigError("mode: unknown construction '" + mode + "'");
            }
            Rng rng(g.seed, 2);
            PhiReport rep = run_phi(w.me, phi_map(pm, w.sp, w.nm, r), g.samples, rng, static_cast<size_t>(g.samples));
            std::string body = PairCertificate::csv_header() + "\n";
            for (const auto& c : rep.kept) body += c.csv_row() + "\n";
            emit(g.out, body);
            std::ostream& info = g.out.empty() ? std::cerr : std::cout;
            info << "sampled=" << rep.sampled << " friendly=" << rep.friendly << " not_friendly=" << rep.not_friendly
                 << " buddy=" << rep.buddy << " unit=" << rep.buddy_unit << " mu(B) in [" << approx(rep.mu_B.lower, 4)
                 << ", " << approx(rep.mu_B.upper, 4) << "]\n";
            return rep.not_friendly == 0 && rep.buddy == rep.friendly ? kPass : kFail;
        }

        if (*jn) {
            Rng rng(g.seed, 3);
            PJOptions o;
            o.samples = g.samples;
            PJReport pj = joining_prep(w.me, kj, rng, o);
            JoiningTimes jt = joining_times(w.s, kj);
            EmpiricalJoining e = empirical_joining(w.sp, jt.alpha[kj], g.samples, g.depth, rng);
            ordered_json j;
            j["k"] = kj;
            j["a"] = pj.sets.a;
            j["P"] = str(pj.sets.P);
            j["Q"] = str(pj.sets.Q);
            j["alpha"] = str(jt.alpha[kj]);
            j["gamma"] = str(jt.gamma[kj]);
            j["sampled"] = pj.sampled;
            j["in_A"] = pj.in_A;
            j["in_B"] = pj.in_B;
            j["in_U"] = pj.in_U;
            j["in_V"] = pj.in_V;
            j["lines"] = ordered_json::array();
            for (const auto& l : pj.lines)
                j["lines"].push_back({{"name", l.name},
                                      {"verdict", to_string(l.verdict)},
                                      {"tested", l.tested},
                                      {"failures", l.failures},
                                      {"detail", l.detail}});
            j["joining"] = {{"time", str(jt.alpha[kj])},
                            {"depth", e.depth},
                            {"samples", e.samples},
                            {"rejected", e.rejected},
                            {"atoms", e.atoms.size()},
                            {"kr_to_product", approx(kr_to_product(e), 8)},
                            {"truncation_slack", approx(truncation_slack(e.depth), 8)}};
            emit(g.out, j.dump(2) + "\n");
            if (!csv_out.empty()) emit(csv_out, e.csv());
            if (!g.out.empty()) std::cout << pj.text();
            Verdict v = Verdict::Pass;
            for (const auto& l : pj.lines)
                if (l.verdict == Verdict::Fail) v = Verdict::Fail;
            return verdict_code(v);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kFail;
    }
    return kPass;
}
