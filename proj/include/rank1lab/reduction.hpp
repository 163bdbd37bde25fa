#pragma once

#include "rank1lab/measure.hpp"
#include "rank1lab/numeration.hpp"
#include "rank1lab/pairs.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rank1lab {

// How a digit restriction at one scale was produced: side of the split and the time that set its endpoints.
struct SplitTag {
    char side = 'L';  // 'L', 'R' or 'F'
    int sign = 1;
    long long e = 0;
};

struct ReductionEntry {
    Constraint set;  // within X
    Int n = 0;
    int ancestor = 0;  // 1-based index at the previous level; 0 at level 1
    int pair = 0;      // 1-based partner at this level
    std::string path;  // split sides from the root, e.g. "LR"
    std::map<int, SplitTag> tags;
    std::vector<Int> lineage;               // n, n of the ancestor, ..., m
    std::vector<std::string> bad_clauses;   // filled when the next level is built
    bool reducible = false;
};

enum class FriendSource { Bounded, Small, Friends, Paired, None };
const char* to_string(FriendSource f);

// One constituent of some A_0, with the construction meant to supply its buddies.
struct A0Part {
    Constraint set;
    int level = 1;  // first level whose A_0 contains it
    std::string why;
    FriendSource source = FriendSource::None;
    Int source_r = 0;                    // time handed to the construction
    std::optional<Constraint> side;      // extra digit window the construction needs
    int buddy_scale = 0;
    int partner = -1;                    // Paired: the part it is compared with
    std::vector<Int> lineage;
};

struct ReductionLevel {
    int i = 1;
    int scale_prev = 0;  // lambda^(i-1)(J(m))
    int scale = 0;       // lambda^i(J(m))
    std::vector<ReductionEntry> entries;
    std::vector<int> a0;  // parts making up A_0^(i)
    std::vector<std::string> notes;
};

struct ReductionTrace {
    Int m = 0;
    int tau = 0, Jm = 0, I = 0;
    std::vector<ReductionLevel> levels;
    std::vector<A0Part> parts;

    ConstraintSet A0(int i) const;
    std::string json() const;
};

struct ReductionOptions {
    int tau_floor = -1;  // -1: the third unbounded scale, or the last one when fewer exist
};

// TargetTooCoarse when tau >= J(m); TargetTooFine when tau is below the floor
ReductionTrace reduce_trace(const Numeration& nm, const Int& m, int tau, const ReductionOptions& opt = {});
int default_tau_floor(const Schedule& s);

struct TraceReport {
    LemmaReport lines;
    std::vector<Verdict> e4_measure;        // per level
    std::vector<MeasureInterval> e4_ratio;  // mu(F) / mu(A_0) per level
    std::vector<std::string> notes;         // parts whose construction could not be sampled
    bool structural_ok() const;
    bool ok() const { return lines.ok(); }
    std::string text() const;
};
TraceReport verify_trace(const Measure& m, const Numeration& nm, const ReductionTrace& tr, long long samples, Rng& rng);
// negative control: swap partners of two pairs at the first level holding two pairs
ReductionTrace corrupt_pairing(const ReductionTrace& tr);

struct MultipleLevel {
    int i = 0;
    long long compared = 0, equal = 0, diverged = 0, only_m = 0, only_sm = 0;
    std::map<std::string, long long> branches;  // trichotomy branch counts
};
struct MultiplesReport {
    Int m = 0, s = 0;
    ReductionTrace tm, tsm;
    std::vector<MultipleLevel> levels;
    LemmaReport lemma;  // reduc_multiply on every reducible time of m's trace
    MeasureInterval a0_m, a0_sm;
    bool ok() const;
    std::string text() const;
};
MultiplesReport verify_multiples(const Measure& me, const Numeration& nm, const Int& m, int tau, long long s,
                                 const ReductionOptions& opt = {});

}  // namespace rank1lab
