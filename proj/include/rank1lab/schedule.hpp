#pragma once

#include "rank1lab/bigint.hpp"

#include <map>
#include <string>
#include <vector>

namespace rank1lab {

struct ScheduleSpec {
    std::string name = "custom";
    std::vector<long long> a;  // unbounded scales a(1) < a(2) < ...
    std::vector<long long> d;  // c(a(j)) = 2 d(j) + 1
    int max_scale = 0;         // K: largest materialized scale
    bool paper_formula = false;  // a(j) = d(j) = 2^(j+5) for all j, infinitely many removals
    bool removals = true;        // false: S itself, nothing removed
};

class Schedule {
public:
    Schedule() = default;
    static Schedule build(const ScheduleSpec& spec);
    static Schedule paper(int max_scale = 520);
    static Schedule preset(const std::string& name);
    static std::vector<std::string> preset_names();

    const std::string& name() const { return spec_.name; }
    int K() const { return spec_.max_scale; }
    bool paper_formula() const { return spec_.paper_formula; }
    bool removals() const { return spec_.removals; }
    // finite system: nothing is removed beyond K, so X = Y_K
    bool finite() const { return !spec_.paper_formula; }

    long long c(long long n) const;
    bool unbounded(long long n) const { return index_of(n) > 0; }
    int index_of(long long n) const;  // j with a(j) = n, or 0
    long long a(int j) const;
    long long d(int j) const;
    int count() const { return static_cast<int>(a_.size()); }  // known unbounded indices
    int count_upto(long long n) const;                          // #{j : a(j) <= n}
    long long lambda(long long s) const;                        // largest a(j) < s
    Schedule with_max_scale(int K) const;
    const ScheduleSpec& spec() const { return spec_; }

private:
    ScheduleSpec spec_;
    std::vector<long long> a_, d_;
};

// Exact tables.  N(k) = p(k+1) is the number of surviving words of length k.
struct Tables {
    const Schedule* sched = nullptr;
    int K = 0;
    std::vector<Int> t;        // 0..K
    std::vector<Int> p;        // 1..K+1
    std::vector<Int> q;        // 0..K
    std::vector<Int> removed;  // |W_k| as a count of length-k words, 1..K

    const Int& N(int k) const { return p.at(k + 1); }
    Int P(int j) const;
    Int Q(int j) const;
    int max_unbounded() const;  // largest j with a(j) <= K
};

Tables compute_tables(const Schedule& s, int N = -1);

// P(1..kmax), Q(1..kmax) without per-scale tables: closed-form jumps across bounded runs.
struct PQSeq {
    std::vector<Int> P, Q;  // 1-based, index 0 unused
};
PQSeq unbounded_heights(const Schedule& s, int kmax);

struct MassInterval {
    Rat lower, upper;
    bool below_eighth = false;
    bool exact = false;
};
MassInterval removed_mass(const Schedule& s, const Tables& tb, int K);

struct PropertyLine {
    std::string name;
    bool holds = true;
    std::string witness;
};
std::vector<PropertyLine> verify_p_properties(const Schedule& s, const Tables& tb, int n_lo, int n_hi);
// (c(n)+1)p(n) <= t(n) and Lemma 2.7 for all n <= N
std::vector<PropertyLine> verify_standing_inequalities(const Schedule& s, const Tables& tb, int N);

std::string tables_csv(const Schedule& s, const Tables& tb);

// key = value config; a = [..], d = [..], preset = "paper", max_scale = K
Schedule schedule_from_config(const std::map<std::string, std::string>& kv);

}  // namespace rank1lab
