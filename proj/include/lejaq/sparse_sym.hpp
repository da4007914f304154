#pragma once

#include "lejaq/types.hpp"

#include <vector>

namespace lejaq {

/// One undirected edge with weight; used when assembling graphs.
struct WeightedEdge {
    Index u = 0;
    Index v = 0;
    double w = 1.0;
};

/// Symmetric sparse matrix.  Both triangles are stored so columns and rows
/// can be streamed without transposition; explicit zeros are never stored.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    /// Assembles from undirected edges.  A pair listed twice must carry the
    /// same weight (bitwise); self loops are allowed and contribute a single
    /// diagonal entry.  Zero-weight edges are dropped.
    static SparseSymMatrix from_edges(Index n, const std::vector<WeightedEdge>& edges);

    /// Wraps a matrix that is already symmetric.  Asymmetry beyond exact
    /// equality of stored values is an error.
    static SparseSymMatrix from_sparse(SpMat m);

    Index size() const { return mat_.rows(); }
    Index nonzeros() const { return mat_.nonZeros(); }

    double coeff(Index x, Index y) const { return mat_.coeff(x, y); }
    const SpMat& eigen() const { return mat_; }
    Matrix to_dense() const { return Matrix(mat_); }

    Vector matvec(const Vector& x) const;

    /// Signed row sums (degrees, for a non-negative adjacency matrix).
    Vector row_sums() const;

    /// Dense copy of column j.
    Vector column(Index j) const;

    /// Calls f(row, value) for each stored entry of column j, by ascending row.
    template <class F>
    void for_each_in_column(Index j, F&& f) const {
        for (SpMat::InnerIterator it(mat_, j); it; ++it) f(it.row(), it.value());
    }

private:
    explicit SparseSymMatrix(SpMat m) : mat_(std::move(m)) {}
    SpMat mat_;
};

/// Max-norm summaries: largest |diagonal|, largest absolute row sum, and the
/// same with the diagonal excluded.
NormReport norms(const SparseSymMatrix& a);

/// Flatness of a positive vector: max(v) / min(v).  Declines skewed inputs
/// only through the positivity requirement.
double kappa(const Vector& v);

/// Bilinear form mu^T A nu.
double quadratic_form(const SparseSymMatrix& a, const Vector& mu, const Vector& nu);

/// A*A with explicit zeros pruned.  The product of a symmetric matrix with
/// itself; entries count weighted two-step walks.
SparseSymMatrix square(const SparseSymMatrix& a);

/// Unnormalized Laplacian diag(row_sums(A)) - A; annihilates the constant
/// vector exactly.
SparseSymMatrix graph_laplacian(const SparseSymMatrix& a);

/// True when every vertex is reachable from vertex 0 (edges = stored entries).
bool is_connected(const SparseSymMatrix& a);

/// Restriction of a graph to its largest connected component.
struct ComponentResult {
    SparseSymMatrix graph;
    std::vector<Index> vertices;  ///< vertices[new_id] = original id, ascending
};

/// Largest component by vertex count; ties broken toward the component whose
/// smallest original vertex id is lowest.
ComponentResult largest_connected_component(const SparseSymMatrix& a);

}  // namespace lejaq
