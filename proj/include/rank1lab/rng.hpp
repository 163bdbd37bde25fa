#pragma once

#include <cstdint>
#include <string>

namespace rank1lab {

// Counter-based: output i of stream (seed, stream) is mix(seed, stream, i).
class Rng {
public:
    static constexpr const char* algorithm = "splitmix64-ctr";

    Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t at(uint64_t i) const { return mix(mix(mix(seed_) ^ stream_) ^ i); }
    uint64_t next() { return at(counter_++); }

    // uniform in [0, n), n >= 1; Lemire's multiply-shift with rejection
    uint64_t below(uint64_t n) {
        for (;;) {
            unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
            uint64_t lo = static_cast<uint64_t>(m);
            if (lo >= n || lo >= (-n) % n) return static_cast<uint64_t>(m >> 64);
        }
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    uint64_t counter() const { return counter_; }

private:
    uint64_t seed_, stream_, counter_ = 0;
};

uint64_t seed_from_env(uint64_t fallback);

}  // namespace rank1lab
