#pragma once

#include "rank1lab/schedule.hpp"

#include <deque>
#include <string>
#include <vector>

namespace rank1lab {

struct TowerExpansion {
    Int r = 0;
    int J = 0;              // scale; J(0) = 0
    long long lst = 0;      // e(J)
    std::vector<long long> e;  // e[j] for 1 <= j <= J, e[0] unused

    Int reconstruct(const Tables& tb) const;
    std::string json() const;
};

class Numeration {
public:
    Numeration(const Schedule& s, const Tables& tb) : s_(&s), tb_(&tb) {}

    TowerExpansion expand(const Int& r) const;
    int scale(const Int& r) const;      // J(r)
    long long lst(const Int& r) const;  // lst(r)
    Int L(const Int& r) const;
    Int R(const Int& r) const;
    bool unbounded_scale(const Int& r) const;

    const Schedule& schedule() const { return *s_; }
    const Tables& tables() const { return *tb_; }

private:
    const Schedule* s_;
    const Tables* tb_;
};

struct LemmaTally {
    std::string lemma;
    long long tested = 0, skipped = 0, failures = 0;
    std::string witness;  // first counterexample
    void fail(const std::string& w) {
        if (failures++ == 0) witness = w;
    }
};

struct LemmaReport {
    std::deque<LemmaTally> lines;  // stable references across line()
    bool ok() const;
    LemmaTally& line(const std::string& name);
    std::string text() const;
};

// Every reduction lemma at one integer m; adds to the report.
void check_reduction_lemmas_at(const Numeration& nm, const Int& m, LemmaReport& rep);
// for_pairing at unbounded index r, all 0 < |k| <= 2d(r)+3
void check_for_pairing(const Numeration& nm, int r, LemmaReport& rep);
// reduc_multiply at one (m, k); the sweep drivers choose k
void check_reduc_multiply(const Numeration& nm, const Int& m, long long k, LemmaReport& rep);
long long multiplier_bound(const Numeration& nm, const Int& m);  // 6 d(b) for J(m) = a(b)

LemmaReport verify_reduction_lemmas_range(const Numeration& nm, const Int& lo, const Int& hi);

// random digit strings obeying 2|e(j)| <= c(j)+1 for j <= J
bool check_expansion_bound(const Numeration& nm, const std::vector<long long>& digits);

}  // namespace rank1lab
