#include "lejaq/generators.hpp"

#include "lejaq/rng.hpp"

#include <set>
#include <vector>

namespace lejaq {

SparseSymMatrix watts_strogatz(Index n, Index mean_degree, double beta, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("watts_strogatz: need at least three vertices");
    if (mean_degree < 2 || mean_degree % 2 != 0 || mean_degree >= n)
        throw std::invalid_argument("watts_strogatz: mean_degree must be even, >= 2 and < n");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("watts_strogatz: beta must lie in [0, 1]");

    std::vector<std::set<Index>> adj(static_cast<size_t>(n));
    auto link = [&](Index a, Index b) {
        adj[static_cast<size_t>(a)].insert(b);
        adj[static_cast<size_t>(b)].insert(a);
    };
    auto unlink = [&](Index a, Index b) {
        adj[static_cast<size_t>(a)].erase(b);
        adj[static_cast<size_t>(b)].erase(a);
    };
    for (Index j = 1; j <= mean_degree / 2; ++j)
        for (Index u = 0; u < n; ++u) link(u, (u + j) % n);

    Rng rng(seed);
    // Visit lattice edges ring by ring, rewiring the clockwise endpoint.
    for (Index j = 1; j <= mean_degree / 2; ++j) {
        for (Index u = 0; u < n; ++u) {
            const Index v = (u + j) % n;
            if (!adj[static_cast<size_t>(u)].contains(v)) continue;  // already rewired away
            if (rng.uniform01() >= beta) continue;
            if (static_cast<Index>(adj[static_cast<size_t>(u)].size()) >= n - 1) continue;  // saturated
            Index w;
            do {
                w = rng.index(n);
            } while (w == u || adj[static_cast<size_t>(u)].contains(w));
            unlink(u, v);
            link(u, w);
        }
    }

    std::vector<WeightedEdge> edges;
    for (Index u = 0; u < n; ++u)
        for (Index v : adj[static_cast<size_t>(u)])
            if (u < v) edges.push_back({u, v, 1.0});
    return SparseSymMatrix::from_edges(n, edges);
}

}  // namespace lejaq
