#pragma once

#include "rank1lab/measure.hpp"
#include "rank1lab/numeration.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rank1lab {

// alpha(0) = 1, gamma(0) = 0, alpha(k+1) = P(k+1) + gamma(k), gamma(k+1) = -P(k+1) + alpha(k)
struct JoiningTimes {
    std::vector<Int> alpha, gamma;  // index 0..kmax
};
JoiningTimes joining_times(const PQSeq& pq, int kmax);
JoiningTimes joining_times(const Schedule& s, int kmax);
// first k in 1..kmax breaking either tower relation, 0 when none
int check_joining_relations(const PQSeq& pq, const JoiningTimes& jt, int kmax);

// ---- tower sets at unbounded index k (desk schedules)

enum class TowerClass { U, A, B };
const char* to_string(TowerClass c);

struct TowerSets {
    int k = 0;
    long long a = 0, d = 0;
    Int P, Q;
    Int v_time;        // V(k) = Bad(a(k), v_time)
    Int span;          // A(k) is built from T^n J(k), 0 <= n < span
    DigitSet u0;       // U_0(k): digits of x(a(k))
    Int return_bound;  // PJ1 lower bound

    // Bad membership decides V; the T-orbit back to the base decides the tower part
    bool in_V(const Space& sp, const Word& x) const;
    bool in_J(const Space& sp, const Word& x) const;
    TowerClass classify(const Space& sp, const Word& x) const;
    // min{n >= 1 : T^n x in J(k)} for x in J(k)
    Int first_return(const Space& sp, const Word& x) const;
};
// ScheduleTooLarge unless the schedule is finite and a(k) < K; NotUnboundedScale for k out of range
TowerSets tower_sets(const Space& sp, int k);

struct PJLine {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    long long tested = 0, failures = 0;
    std::string detail;
};
struct PJReport {
    int k = 0;
    TowerSets sets;
    long long sampled = 0, in_A = 0, in_B = 0, in_U = 0, in_V = 0;
    MeasureInterval mu_U0, mu_A, mu_B, mu_V;  // mu_U0 exact; the others Wilson brackets
    Int min_return;                            // smallest first return seen on J(k) samples
    std::vector<PJLine> lines;
    const PJLine& line(const std::string& n) const;
    bool ok() const;  // no Fail
    std::string text() const;
};
struct PJOptions {
    long long samples = 1000;      // classification samples from mu
    long long j_samples = 200;     // PJ1 samples from J(k)
    long long times_per_point = 6; // PJ3/PJ5 powers per sampled point
    Rat c = Rat(1, 20);            // PJ8 floor
    std::optional<DigitSet> u0;    // replaces U_0(k) (negative controls)
};
PJReport joining_prep(const Measure& m, int k, Rng& rng, const PJOptions& opt = {});

// ---- empirical joinings and KR distance

using Prefix = std::vector<long long>;
using Cell = std::pair<Prefix, Prefix>;

struct EmpiricalJoining {
    int depth = 0;
    std::map<Cell, Rat> atoms;  // weights sum to 1
    long long samples = 0, rejected = 0;

    std::pair<std::map<Prefix, Rat>, std::map<Prefix, Rat>> marginals() const;
    Rat total() const;
    std::string csv() const;
    static EmpiricalJoining from_csv(const std::string& text);
};
// push-forward of mu under x -> (x, T^r x), prefixes of length depth
EmpiricalJoining empirical_joining(const Space& sp, const Int& r, long long samples, int depth, Rng& rng);
EmpiricalJoining point_mass(const Prefix& x, const Prefix& y);
EmpiricalJoining mixture(const EmpiricalJoining& a, const EmpiricalJoining& b, const Rat& wa);
EmpiricalJoining product_of_marginals(const EmpiricalJoining& e);  // explicit; small supports only
Rat kr_distance(const EmpiricalJoining& a, const EmpiricalJoining& b);
// d_KR(e, product of e's marginals) without building the product
Rat kr_to_product(const EmpiricalJoining& e);
// l_j = 2^(-j-2) for j < D, l_D = 2^(-D-1)
Rat kr_edge(int j, int D);
inline Rat truncation_slack(int D) { return Rat(1, Int(1) << (D + 1)); }

// ---- hypotheses of the joining construction

struct CEOptions {
    long long samples = 1000;  // per k for J6
    long long kr_samples = 2000;
    int depth = 4;
    PJOptions pj;
};
struct CEReport {
    int k_lo = 1, k_hi = 1;
    std::vector<PJLine> lines;  // J1..J7, one per (hypothesis, k)
    std::vector<PJReport> prep;
    std::string text() const;
    bool ok() const;
};
CEReport check_prop_ce_hypotheses(const Measure& m, int k_lo, int k_hi, Rng& rng, const CEOptions& opt = {});

// ---- barycenter recursion

struct BaryOptions {
    int d = 2;
    double c = 0.2;
    int steps = 40;
    long long trials = 1000;
    double delta_max = 0.01;  // delta_i drawn in [0, delta_max]
};
struct BaryReport {
    double rho = 0;          // contraction rate used in the bound
    double rho_observed = 0; // largest observed one-step spread ratio in delta = 0 trials
    double C = 0;            // constant of the bound, from the contraction estimate
    double C_fit = 0;        // smallest C covering every observed deviation
    long long checks = 0, violations = 0;
    double worst_ratio = 0;  // max deviation / bound
    bool ok() const { return violations == 0; }
    std::string text() const;
};
// one explicit sequence; zeta[i][l], a[i], b[i], delta[i]; PreconditionViolated on inadmissible input
struct BarySequence {
    std::vector<double> a, b, delta;
    std::vector<std::vector<double>> zeta;
};
void check_bary_admissible(const BarySequence& s, double c);
// max_s |zeta_i^(s) - average of zeta_k|
double bary_deviation(const BarySequence& s, int k, int i);
BarySequence bary_simulate(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& delta,
                           const std::vector<double>& zeta0, Rng& rng);
BaryReport bary_recursion_check(const BaryOptions& opt, Rng& rng);

// ---- non-triviality and Cauchy evidence

struct CauchyReport {
    int depth = 4;
    long long samples = 0;
    std::vector<Int> alpha;
    std::vector<Rat> d_alpha;      // d_KR(nu_alpha(k), nu_alpha(k+1)), k = 0..kmax-1
    std::vector<Rat> noise;        // split-half noise estimate per step
    Rat slack;                     // truncation slack
    bool monotone = false;
    Rat mid_vs_product, mid_noise;  // at the largest k
    bool far_from_product = false;
    std::string text() const;
};
CauchyReport joining_cauchy(const Space& sp, int kmax, long long samples, int depth, Rng& rng);

// integral of |1_C - 1_C o T^r| for C = {x(1) = 0}, by sampling
struct MixingPoint {
    int k = 0;
    Int r;
    long long samples = 0, hits = 0;
    double value = 0;
    Wilson ci{0, 0};
};
std::vector<MixingPoint> mixing_profile(const Space& sp, long long samples, Rng& rng);

}  // namespace rank1lab
