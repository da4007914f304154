#include "lejaq/sparse_sym.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace lejaq {

SparseSymMatrix SparseSymMatrix::from_edges(Index n, const std::vector<WeightedEdge>& edges) {
    if (n <= 0) throw std::invalid_argument("from_edges: vertex count must be positive");
    std::map<std::pair<Index, Index>, double> canonical;
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
            throw std::invalid_argument("from_edges: vertex id out of range");
        if (!std::isfinite(e.w)) throw std::invalid_argument("from_edges: non-finite weight");
        const auto key = std::minmax(e.u, e.v);
        auto [it, inserted] = canonical.emplace(key, e.w);
        if (!inserted && it->second != e.w)
            throw std::invalid_argument("from_edges: conflicting weights for edge " +
                                        std::to_string(key.first) + "-" + std::to_string(key.second));
    }
    std::vector<Triplet> trips;
    trips.reserve(2 * canonical.size());
    for (const auto& [key, w] : canonical) {
        if (w == 0.0) continue;
        trips.emplace_back(key.first, key.second, w);
        if (key.first != key.second) trips.emplace_back(key.second, key.first, w);
    }
    SpMat m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return SparseSymMatrix(std::move(m));
}

SparseSymMatrix SparseSymMatrix::from_sparse(SpMat m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("from_sparse: matrix must be square");
    m.prune(0.0, 0.0);
    m.makeCompressed();
    const SpMat t = SpMat(m.transpose());
    if (t.nonZeros() != m.nonZeros()) throw std::invalid_argument("from_sparse: matrix is not symmetric");
    for (Index j = 0; j < m.outerSize(); ++j) {
        SpMat::InnerIterator a(m, j), b(t, j);
        for (; a && b; ++a, ++b) {
            if (a.row() != b.row() || a.value() != b.value())
                throw std::invalid_argument("from_sparse: matrix is not symmetric");
        }
    }
    return SparseSymMatrix(std::move(m));
}

Vector SparseSymMatrix::matvec(const Vector& x) const {
    if (x.size() != size()) throw std::invalid_argument("matvec: dimension mismatch");
    return mat_ * x;
}

Vector SparseSymMatrix::row_sums() const {
    Vector s = Vector::Zero(size());
    for (Index j = 0; j < mat_.outerSize(); ++j)
        for (SpMat::InnerIterator it(mat_, j); it; ++it) s[it.row()] += it.value();
    return s;
}

Vector SparseSymMatrix::column(Index j) const {
    if (j < 0 || j >= size()) throw std::invalid_argument("column: index out of range");
    Vector c = Vector::Zero(size());
    for (SpMat::InnerIterator it(mat_, j); it; ++it) c[it.row()] = it.value();
    return c;
}

NormReport norms(const SparseSymMatrix& a) {
    const Index n = a.size();
    Vector abs_row = Vector::Zero(n);
    Vector abs_diag = Vector::Zero(n);
    const SpMat& m = a.eigen();
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SpMat::InnerIterator it(m, j); it; ++it) {
            abs_row[it.row()] += std::abs(it.value());
            if (it.row() == it.col()) abs_diag[it.row()] = std::abs(it.value());
        }
    }
    NormReport r;
    for (Index x = 0; x < n; ++x) {
        r.diag_max = std::max(r.diag_max, abs_diag[x]);
        r.row_sum = std::max(r.row_sum, abs_row[x]);
        r.offdiag_row_sum = std::max(r.offdiag_row_sum, abs_row[x] - abs_diag[x]);
    }
    return r;
}

double kappa(const Vector& v) {
    if (v.size() == 0) throw std::invalid_argument("kappa: empty vector");
    double lo = v[0], hi = v[0];
    for (Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw std::invalid_argument("kappa: vector must be strictly positive");
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    return hi / lo;
}

double quadratic_form(const SparseSymMatrix& a, const Vector& mu, const Vector& nu) {
    if (mu.size() != a.size() || nu.size() != a.size())
        throw std::invalid_argument("quadratic_form: dimension mismatch");
    return mu.dot(a.eigen() * nu);
}

SparseSymMatrix square(const SparseSymMatrix& a) {
    SpMat p = SpMat(a.eigen() * a.eigen());
    p.prune(0.0, 0.0);
    p.makeCompressed();
    // Exact symmetry can be lost to rounding in the product; mirror the upper
    // triangle so both halves agree bitwise.
    std::vector<Triplet> trips;
    trips.reserve(p.nonZeros());
    for (Index j = 0; j < p.outerSize(); ++j) {
        for (SpMat::InnerIterator it(p, j); it; ++it) {
            if (it.row() > it.col()) continue;
            trips.emplace_back(it.row(), it.col(), it.value());
            if (it.row() != it.col()) trips.emplace_back(it.col(), it.row(), it.value());
        }
    }
    SpMat s(p.rows(), p.cols());
    s.setFromTriplets(trips.begin(), trips.end());
    s.makeCompressed();
    return SparseSymMatrix::from_sparse(std::move(s));
}

SparseSymMatrix graph_laplacian(const SparseSymMatrix& a) {
    const Index n = a.size();
    if (n == 0) throw std::invalid_argument("graph_laplacian: empty matrix");
    const Vector deg = a.row_sums();
    std::vector<Triplet> trips;
    trips.reserve(a.nonzeros() + n);
    std::vector<bool> has_diag(static_cast<size_t>(n), false);
    const SpMat& m = a.eigen();
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SpMat::InnerIterator it(m, j); it; ++it) {
            if (it.row() == j) {
                has_diag[static_cast<size_t>(j)] = true;
                trips.emplace_back(j, j, deg[j] - it.value());
            } else {
                trips.emplace_back(it.row(), j, -it.value());
            }
        }
    }
    for (Index x = 0; x < n; ++x)
        if (!has_diag[static_cast<size_t>(x)]) trips.emplace_back(x, x, deg[x]);
    SpMat l(n, n);
    l.setFromTriplets(trips.begin(), trips.end());
    l.makeCompressed();
    return SparseSymMatrix::from_sparse(std::move(l));
}

namespace {

std::vector<int> component_labels(const SpMat& m, Index& count) {
    const Index n = m.rows();
    std::vector<int> label(static_cast<size_t>(n), -1);
    std::vector<Index> stack;
    int comp = 0;
    for (Index s = 0; s < n; ++s) {
        if (label[s] != -1) continue;
        label[s] = comp;
        stack.push_back(s);
        while (!stack.empty()) {
            const Index x = stack.back();
            stack.pop_back();
            for (SpMat::InnerIterator it(m, x); it; ++it) {
                if (label[it.row()] == -1) {
                    label[it.row()] = comp;
                    stack.push_back(it.row());
                }
            }
        }
        ++comp;
    }
    count = comp;
    return label;
}

}  // namespace

bool is_connected(const SparseSymMatrix& a) {
    if (a.size() == 0) return false;
    Index count = 0;
    component_labels(a.eigen(), count);
    return count == 1;
}

ComponentResult largest_connected_component(const SparseSymMatrix& a) {
    if (a.size() == 0) throw std::invalid_argument("largest_connected_component: empty matrix");
    Index count = 0;
    const std::vector<int> label = component_labels(a.eigen(), count);
    std::vector<Index> sizes(static_cast<size_t>(count), 0);
    for (int l : label) ++sizes[static_cast<size_t>(l)];
    // Components are numbered by ascending smallest vertex id, so the first
    // maximal one realizes the tie-break.
    int best = 0;
    for (int c = 1; c < count; ++c)
        if (sizes[static_cast<size_t>(c)] > sizes[static_cast<size_t>(best)]) best = c;

    ComponentResult res;
    std::vector<Index> new_id(static_cast<size_t>(a.size()), -1);
    for (Index x = 0; x < a.size(); ++x) {
        if (label[static_cast<size_t>(x)] == best) {
            new_id[static_cast<size_t>(x)] = static_cast<Index>(res.vertices.size());
            res.vertices.push_back(x);
        }
    }
    std::vector<Triplet> trips;
    const SpMat& m = a.eigen();
    for (Index j = 0; j < m.outerSize(); ++j) {
        if (new_id[static_cast<size_t>(j)] == -1) continue;
        for (SpMat::InnerIterator it(m, j); it; ++it)
            trips.emplace_back(new_id[static_cast<size_t>(it.row())], new_id[static_cast<size_t>(j)], it.value());
    }
    SpMat sub(static_cast<Index>(res.vertices.size()), static_cast<Index>(res.vertices.size()));
    sub.setFromTriplets(trips.begin(), trips.end());
    sub.makeCompressed();
    res.graph = SparseSymMatrix::from_sparse(std::move(sub));
    return res;
}

}  // namespace lejaq
