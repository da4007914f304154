#include "lejaq/point_cloud.hpp"

#include "lejaq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lejaq {

PointCloud uniform_square_cloud(Index n, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("uniform_square_cloud: size must be positive");
    Rng rng(seed);
    Matrix coords(n, 2);
    for (Index i = 0; i < n; ++i) {
        coords(i, 0) = rng.uniform01();
        coords(i, 1) = rng.uniform01();
    }
    return PointCloud{std::move(coords)};
}

PointCloud two_cluster_cloud(Index n, double heavy_fraction, const Eigen::Vector2d& center1,
                             const Eigen::Vector2d& center2, double spread, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("two_cluster_cloud: size must be positive");
    if (!(heavy_fraction >= 0.0 && heavy_fraction <= 1.0))
        throw std::invalid_argument("two_cluster_cloud: heavy_fraction must lie in [0, 1]");
    if (!(spread > 0.0)) throw std::invalid_argument("two_cluster_cloud: spread must be positive");
    const Index heavy = static_cast<Index>(std::llround(heavy_fraction * static_cast<double>(n)));
    Rng rng(seed);
    Matrix coords(n, 2);
    for (Index i = 0; i < n; ++i) {
        const Eigen::Vector2d& c = (i < heavy) ? center1 : center2;
        coords(i, 0) = c[0] + spread * rng.normal();
        coords(i, 1) = c[1] + spread * rng.normal();
    }
    return PointCloud{std::move(coords)};
}

namespace {

double edge_weight(double dist, const EdgeWeightKind& kind) {
    if (const auto* g = std::get_if<GaussianWeight>(&kind))
        return std::exp(-dist * dist / (g->sigma * g->sigma));
    const auto& lp = std::get<LogPotentialWeight>(kind);
    return std::max(0.0, std::log(1.0 / (dist + lp.epsilon)));
}

}  // namespace

SparseSymMatrix knn_graph(const PointCloud& cloud, Index k, const EdgeWeightKind& weight) {
    const Index n = cloud.size();
    if (n < 2) throw std::invalid_argument("knn_graph: need at least two points");
    if (k < 1 || k >= n) throw std::invalid_argument("knn_graph: k must lie in [1, n-1]");
    if (const auto* g = std::get_if<GaussianWeight>(&weight); g && !(g->sigma > 0.0))
        throw std::invalid_argument("knn_graph: sigma must be positive");
    if (const auto* lp = std::get_if<LogPotentialWeight>(&weight); lp && !(lp->epsilon > 0.0))
        throw std::invalid_argument("knn_graph: epsilon must be positive");

    // dist2[j] for one source at a time; k smallest by (distance, index).
    std::vector<WeightedEdge> edges;
    std::vector<std::pair<double, Index>> cand(static_cast<size_t>(n) - 1);
    for (Index i = 0; i < n; ++i) {
        size_t m = 0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d2 = (cloud.coords.row(i) - cloud.coords.row(j)).squaredNorm();
            cand[m++] = {d2, j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        // A pair proposed from both endpoints gets the same weight bitwise
        // (negation is exact), so the duplicate check in from_edges passes.
        for (Index t = 0; t < k; ++t) {
            const Index j = cand[static_cast<size_t>(t)].second;
            const double w = edge_weight(std::sqrt(cand[static_cast<size_t>(t)].first), weight);
            if (w > 0.0) edges.push_back({i, j, w});
        }
    }
    return SparseSymMatrix::from_edges(n, edges);
}

}  // namespace lejaq
