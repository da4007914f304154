#pragma once

#include "lejaq/sparse_sym.hpp"
#include "lejaq/types.hpp"

#include <cstdint>
#include <variant>

namespace lejaq {

/// Finite point set in R^d, one point per row.
struct PointCloud {
    Matrix coords;

    Index size() const { return coords.rows(); }
    Index dim() const { return coords.cols(); }
};

/// n points drawn uniformly from the unit square.
PointCloud uniform_square_cloud(Index n, std::uint64_t seed);

/// Two isotropic Gaussian clusters in the plane.  The first
/// round(heavy_fraction * n) points sit around center1, the rest around
/// center2; both use the given standard deviation.
PointCloud two_cluster_cloud(Index n, double heavy_fraction, const Eigen::Vector2d& center1,
                             const Eigen::Vector2d& center2, double spread, std::uint64_t seed);

/// Edge weight exp(-dist^2 / sigma^2).
struct GaussianWeight {
    double sigma = 0.1;
};

/// Edge weight max(0, log(1 / (dist + epsilon))).
struct LogPotentialWeight {
    double epsilon = 1e-3;
};

using EdgeWeightKind = std::variant<GaussianWeight, LogPotentialWeight>;

/// Symmetrized k-nearest-neighbour graph: an edge appears when either
/// endpoint lists the other among its k closest points.  Neighbour ties are
/// broken toward the smaller index; zero-weight edges are dropped.
SparseSymMatrix knn_graph(const PointCloud& cloud, Index k, const EdgeWeightKind& weight);

}  // namespace lejaq
