#pragma once
// Brute-force reference built straight from the removal rules, for schedules with small t(K).
// Works on plain 64-bit values; shares nothing with the library except the digit alphabet.

#include "rank1lab/schedule.hpp"
#include "rank1lab/space.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Enum {
    const rank1lab::Schedule* s;
    int K;
    std::vector<int64_t> t;                // t[k]
    std::vector<std::vector<char>> alive;  // alive[k][v]
    std::vector<std::vector<int64_t>> rank;  // rank[k][v] for alive v, -1 otherwise
    std::vector<int64_t> p;                  // measured base-return times, p[1..K]

    explicit Enum(const rank1lab::Schedule& sched) : s(&sched), K(sched.K()) {
        t.assign(K + 1, 1);
        for (int k = 1; k <= K; ++k) t[k] = t[k - 1] * (s->c(k) + 1);
        if (t[K] > 20000000) throw std::runtime_error("oracle: schedule too large");
        alive.assign(K + 1, {});
        rank.assign(K + 1, {});
        p.assign(K + 2, 0);
        alive[0] = {1};
        build_rank(0);
        int64_t Qprev = 0, Pprev = 0;
        for (int k = 1; k <= K; ++k) {
            auto& A = alive[k];
            A.assign(t[k], 0);
            for (int64_t v = 0; v < t[k]; ++v) A[v] = alive[k - 1][v % t[k - 1]];
            int n = s->index_of(k);
            if (!s->removals()) {
            } else if (n == 0) {
                int64_t v7 = 0;
                for (int i = 1; i < k; ++i) v7 += 7 * t[i - 1];
                A[v7 + 8 * t[k - 1]] = 0;
            } else {
                int64_t Q = (n == 1) ? 1 : 2 * Pprev - Qprev;
                // the Q predecessors of the base in the S|Y_(k-1) cycle reach it within Q steps
                std::vector<char> top(t[k - 1], 0);
                int64_t u = 0;
                for (int64_t j = 0; j < Q; ++j) {
                    do {
                        u = (u - 1 + t[k - 1]) % t[k - 1];
                    } while (!alive[k - 1][u]);
                    top[u] = 1;
                }
                int64_t d = s->d(n);
                for (int64_t x = d + 1; x <= s->c(k); ++x)
                    for (int64_t v = 0; v < t[k - 1]; ++v)
                        if (top[v]) A[v + x * t[k - 1]] = 0;
                Qprev = Q;
            }
            // p(k): steps of S|Y_k from [0^k] to [0^(k-1) 1]
            int64_t steps = 0;
            for (int64_t v = 0; v != t[k - 1]; ) {
                do {
                    v = (v + 1) % t[k];
                } while (!A[v]);
                ++steps;
            }
            p[k] = steps;
            if (n) Pprev = p[k];
            build_rank(k);
        }
    }

    void build_rank(int k) {
        rank[k].assign(alive[k].size(), -1);
        int64_t r = 0;
        for (size_t v = 0; v < alive[k].size(); ++v)
            if (alive[k][v]) rank[k][v] = r++;
    }

    int64_t count(int k) const {
        int64_t c = 0;
        for (char a : alive[k]) c += a;
        return c;
    }

    int64_t value(const rank1lab::Word& w, int k) const {
        int64_t v = 0;
        for (int i = k; i >= 1; --i) v = v * (s->c(i) + 1) + w(i);
        return v;
    }

    rank1lab::Word word(int64_t v, int k) const {
        rank1lab::Word w(std::vector<long long>(k, 0));
        for (int i = 1; i <= k; ++i) {
            w.at(i) = v % (s->c(i) + 1);
            v /= (s->c(i) + 1);
        }
        return w;
    }

    // T^r on length-K words by single S steps; stime is the S-time used
    rank1lab::Word T(const rank1lab::Word& w, int64_t r, int64_t& stime) const {
        int64_t v = value(w, K);
        stime = 0;
        int dir = r >= 0 ? 1 : -1;
        for (int64_t i = 0; i < (r >= 0 ? r : -r); ++i) {
            do {
                v = (v + dir + t[K]) % t[K];
                stime += dir;
            } while (!alive[K][v]);
        }
        return word(v, K);
    }
};

}  // namespace oracle
