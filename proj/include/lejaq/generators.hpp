#pragma once

#include "lejaq/sparse_sym.hpp"

#include <cstdint>

namespace lejaq {

/// Watts-Strogatz small-world graph with unit weights.  Starts from a ring
/// where each vertex connects to mean_degree/2 neighbours on each side, then
/// rewires the clockwise endpoint of every lattice edge with probability
/// beta, avoiding self loops and duplicate edges.  An edge with no legal
/// rewiring target is kept, so the edge count is always n * mean_degree / 2.
SparseSymMatrix watts_strogatz(Index n, Index mean_degree, double beta, std::uint64_t seed);

}  // namespace lejaq
