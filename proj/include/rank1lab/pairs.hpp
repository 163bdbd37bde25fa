#pragma once

#include "rank1lab/measure.hpp"
#include "rank1lab/numeration.hpp"

#include <string>
#include <vector>

namespace rank1lab {

enum class PairKind { Buddy, Friendly };
const char* to_string(PairKind k);

struct PairResult {
    Membership m = Membership::Unknown;
    Int witness = 0;     // i for buddies, h for friendly pairs
    std::string clause;  // first failing condition when not In
};

struct PairCertificate {
    Word y, z;
    Int r = 0;
    int j = 0;
    PairKind kind = PairKind::Buddy;
    Int witness = 0;

    static std::string csv_header();
    std::string csv_row() const;
};

PairResult is_buddy(const Space& sp, const Word& y, const Word& z, const Int& r, int j);
// NotBoundedScale when j is unbounded
PairResult is_friendly(const Space& sp, const Word& y, const Word& z, const Int& r, int j);
// re-runs the predicate named by the certificate
bool recheck(const Space& sp, const PairCertificate& c);

struct TransportReport {
    bool holds = false;
    Int witness_r = 0, witness_u = 0;
};
// (r,j) buddies with T^r =^{J-1} T^u on both points stay (u,j) buddies; HypothesisFails names the clause
TransportReport verify_buddy_transport(const Space& sp, const Word& y, const Word& z, const Int& r, const Int& u, int j,
                                       int J);

enum class PhiMode { Bounded, Small, SmallE, Boundary };
const char* to_string(PhiMode m);
PhiMode parse_phi_mode(const std::string& s);

// B plus the one-digit edit producing the partner of a sampled point.
struct PhiMap {
    PhiMode mode = PhiMode::Bounded;
    Int r = 0;
    int J = 0;           // J(r)
    int pair_scale = 0;  // pairs are (r, pair_scale) friendly
    int digit = 0;       // edited coordinate
    long long shift = 0; // new digit = old digit + shift
    bool sample_is_z = true;
    int bad_scale = 0;
    Int bad_time = 0;
    bool screen_partner = false;  // partner is screened against Bad as well
    ConstraintSet B;              // intersected with X when measured or sampled
    Rat nu_floor = 0;             // claimed lower bound on nu(B ∩ X); 0 when none
    Rat mu_floor = 0;             // claimed lower bound on mu(B)

    Word partner(const Word& x) const;
    // (y, z) in predicate order
    std::pair<Word, Word> pair(const Word& x) const;
};

PhiMap phi_bounded(const Space& sp, const Numeration& nm, const Int& r);
PhiMap phi_small(const Space& sp, const Numeration& nm, const Int& r);
PhiMap phi_small_e(const Space& sp, const Numeration& nm, const Int& r);
// pairs from the boundary digits of an unbounded J(r) with |lst(r)| >= 10: x(J+1) = 7 (r > 0) or 8 (r < 0)
// against the same point with x(J+1) = 3
PhiMap phi_boundary(const Space& sp, const Numeration& nm, const Int& r);
PhiMap phi_map(PhiMode mode, const Space& sp, const Numeration& nm, const Int& r);

struct PhiReport {
    PhiMap map;
    Rat nu_B = 0;  // exact at the horizon
    MeasureInterval mu_B;
    long long sampled = 0, proposals_rejected = 0, excluded_bad = 0;
    long long partner_outside_X = 0, friendly = 0, not_friendly = 0, buddy = 0, buddy_unit = 0;
    std::string first_failure;
    std::vector<PairCertificate> kept;

    bool nu_floor_ok() const { return nu_B >= map.nu_floor; }
    bool mu_floor_ok() const { return mu_B.lower >= map.mu_floor; }
};
// samples points of B ∩ X, screens Bad, checks each pair with both predicates
PhiReport run_phi(const Measure& m, const PhiMap& phi, long long samples, Rng& rng, size_t keep = 0);

// Reduction statements at an unbounded scale for one r: S-level agreement, T-level agreement
// outside Bad, and the pairs built from the boundary digits.
LemmaReport check_reduction_corollaries(const Measure& m, const Numeration& nm, const Int& r, long long samples,
                                        Rng& rng);

}  // namespace rank1lab
