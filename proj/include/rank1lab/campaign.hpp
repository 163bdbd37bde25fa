#pragma once

#include "rank1lab/measure.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rank1lab {

struct CampaignConfig {
    std::map<std::string, std::string> schedule;  // preset / a / d / max_scale, as for schedule_from_config
    std::vector<std::string> checks;
    long long samples = 1000;
    int depth = 4;
    int instances = 10;  // reduction traces, (m, s) pairs
    uint64_t seed = 1;
    std::string rng = Rng::algorithm;
    int threads = 0;  // 0: hardware concurrency
};

struct CheckResult {
    std::string id;
    Verdict verdict = Verdict::Inconclusive;
    long long tested = 0, failures = 0;
    std::string detail;
};

struct CampaignReport {
    std::string schedule;
    uint64_t seed = 0;
    std::string rng;
    long long samples = 0;
    int depth = 0;
    std::vector<CheckResult> results;  // in request order

    std::string json() const;
    std::string text() const;
    // 0 all pass (or nothing requested), 1 any fail, 2 no fail but something inconclusive
    int exit_code() const;
};

// every check identifier the harness knows
const std::vector<std::string>& check_manifest();
// manifest entries without a bound operation; the harness refuses to run when non-empty
std::vector<std::string> unbound_checks();

// ConfigError for an unknown check id or an RNG algorithm other than the built-in one
CampaignReport run_campaign(const CampaignConfig& cfg);

}  // namespace rank1lab
