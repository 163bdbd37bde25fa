#pragma once

// Independent Wasserstein-1 oracle: min-cost transportation between two weighted point sets,
// solved by successive shortest paths (Bellman-Ford on the residual graph) in doubles.
// Costs come from the pairwise max metric on truncated prefixes, not from the tree formula.

#include "rank1lab/joining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline double prefix_dist(const rank1lab::Prefix& u, const rank1lab::Prefix& v) {
    for (size_t j = 0; j < u.size(); ++j)
        if (u[j] != v[j]) return std::ldexp(1.0, -static_cast<int>(j + 1));
    return 0.0;
}

inline double cell_dist(const rank1lab::Cell& a, const rank1lab::Cell& b) {
    return std::max(prefix_dist(a.first, b.first), prefix_dist(a.second, b.second));
}

inline double transport(const std::vector<double>& supply, const std::vector<double>& demand,
                        const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(supply.size()), m = static_cast<int>(demand.size());
    const int S = n + m, T = n + m + 1, V = n + m + 2;
    struct E {
        int to;
        double cap, cost;
    };
    std::vector<E> es;
    std::vector<std::vector<int>> g(static_cast<size_t>(V));
    auto add = [&](int u, int v, double cap, double c) {
        g[u].push_back(static_cast<int>(es.size()));
        es.push_back({v, cap, c});
        g[v].push_back(static_cast<int>(es.size()));
        es.push_back({u, 0, -c});
    };
    for (int i = 0; i < n; ++i) add(S, i, supply[i], 0);
    for (int j = 0; j < m; ++j) add(n + j, T, demand[j], 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) add(i, n + j, std::numeric_limits<double>::infinity(), cost[i][j]);
    const double eps = 1e-15;
    double total = 0;
    for (;;) {
        std::vector<double> dist(static_cast<size_t>(V), std::numeric_limits<double>::infinity());
        std::vector<int> via(static_cast<size_t>(V), -1);
        dist[S] = 0;
        for (int it = 0; it < V; ++it) {
            bool changed = false;
            for (int u = 0; u < V; ++u) {
                if (dist[u] == std::numeric_limits<double>::infinity()) continue;
                for (int id : g[u]) {
                    const E& e = es[id];
                    if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-18) {
                        dist[e.to] = dist[u] + e.cost;
                        via[e.to] = id;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (via[T] < 0) break;
        double f = std::numeric_limits<double>::infinity();
        for (int v = T; v != S; v = es[via[v] ^ 1].to) f = std::min(f, es[via[v]].cap);
        for (int v = T; v != S; v = es[via[v] ^ 1].to) {
            es[via[v]].cap -= f;
            es[via[v] ^ 1].cap += f;
        }
        total += f * dist[T];
    }
    return total;
}

inline double kr(const rank1lab::EmpiricalJoining& a, const rank1lab::EmpiricalJoining& b) {
    std::vector<rank1lab::Cell> ca, cb;
    std::vector<double> wa, wb;
    for (auto& [c, w] : a.atoms) {
        ca.push_back(c);
        wa.push_back(w.convert_to<double>());
    }
    for (auto& [c, w] : b.atoms) {
        cb.push_back(c);
        wb.push_back(w.convert_to<double>());
    }
    std::vector<std::vector<double>> cost(ca.size(), std::vector<double>(cb.size()));
    for (size_t i = 0; i < ca.size(); ++i)
        for (size_t j = 0; j < cb.size(); ++j) cost[i][j] = cell_dist(ca[i], cb[j]);
    return transport(wa, wb, cost);
}

// random joining: up to `atoms` cells over a small alphabet so that prefixes collide often
inline rank1lab::EmpiricalJoining random_joining(rank1lab::Rng& rng, int depth, int atoms, int alphabet = 3) {
    rank1lab::EmpiricalJoining e;
    e.depth = depth;
    int n = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(atoms)));
    std::vector<std::pair<rank1lab::Cell, long long>> raw;
    long long tot = 0;
    for (int i = 0; i < n; ++i) {
        rank1lab::Prefix x(static_cast<size_t>(depth)), y(static_cast<size_t>(depth));
        for (auto& v : x) v = static_cast<long long>(rng.below(static_cast<uint64_t>(alphabet)));
        for (auto& v : y) v = static_cast<long long>(rng.below(static_cast<uint64_t>(alphabet)));
        long long w = 1 + static_cast<long long>(rng.below(50));
        raw.push_back({{x, y}, w});
        tot += w;
    }
    for (auto& [c, w] : raw) e.atoms[c] += rank1lab::Rat(w, tot);
    e.samples = n;
    return e;
}

}  // namespace oracle
