#include "lejaq/scaling.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace lejaq {

StructuredMatrix::StructuredMatrix(SparseSymMatrix base, double alpha)
    : base_(std::move(base)), alpha_(alpha) {
    if (base_.size() == 0) throw std::invalid_argument("StructuredMatrix: empty base matrix");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("StructuredMatrix: alpha must lie in [0, 1)");
}

Vector StructuredMatrix::matvec(const Vector& x) const {
    if (x.size() != size()) throw std::invalid_argument("StructuredMatrix::matvec: dimension mismatch");
    Vector out = (1.0 - alpha_) * base_.matvec(x);
    out.array() += (alpha_ / static_cast<double>(size())) * x.sum();
    return out;
}

double StructuredMatrix::entry(Index x, Index y) const {
    return (1.0 - alpha_) * base_.coeff(x, y) + alpha_ / static_cast<double>(size());
}

Matrix StructuredMatrix::to_dense() const {
    Matrix out =
        Matrix::Constant(size(), size(), alpha_ / static_cast<double>(size()));
    out += (1.0 - alpha_) * base_.to_dense();
    return out;
}

StructuredMatrix pagerank_augment(const SparseSymMatrix& b, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("pagerank_augment: alpha must lie in (0, 1)");
    const SpMat& m = b.eigen();
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            if (it.value() < 0.0)
                throw std::invalid_argument("pagerank_augment: matrix must be non-negative");
    return StructuredMatrix(b, alpha);
}

ScalingResult sinkhorn_scale(const StructuredMatrix& bt, const Measure& v, double tol,
                             int max_iter) {
    const Index n = bt.size();
    if (n != v.size()) throw std::invalid_argument("sinkhorn_scale: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn_scale: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("sinkhorn_scale: max_iter must be positive");

    const Vector row = bt.matvec(Vector::Ones(n));
    for (Index x = 0; x < n; ++x)
        if (!(row[x] > 0.0))
            throw NumericalError("sinkhorn_scale: row " + std::to_string(x) +
                                 " of the matrix sums to zero");

    Vector d(n);
    for (Index x = 0; x < n; ++x) d[x] = std::sqrt(v(x) / row[x]);

    // Early iterations may overshoot, so growth alone is not an error; a
    // best-so-far residual that stops improving across a whole checkpoint
    // window is.  Scalable inputs contract geometrically and always make
    // representable progress between checkpoints.
    constexpr int kCheckInterval = 256;
    double best = std::numeric_limits<double>::infinity();
    double checkpoint_best = std::numeric_limits<double>::infinity();
    double rel = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= max_iter; ++iter) {
        const Vector bd = bt.matvec(d);
        for (Index x = 0; x < n; ++x)
            if (!(bd[x] > 0.0))
                throw NumericalError("sinkhorn_scale: (B d) vanished at row " + std::to_string(x));

        rel = 0.0;
        for (Index x = 0; x < n; ++x)
            rel = std::max(rel, std::abs(d[x] * bd[x] - v(x)) / v(x));
        if (rel <= tol) {
            double abs_res = 0.0;
            for (Index x = 0; x < n; ++x) abs_res = std::max(abs_res, std::abs(d[x] * bd[x] - v(x)));
            return ScalingResult{d, iter, abs_res};
        }
        best = std::min(best, rel);
        if (iter > 0 && iter % kCheckInterval == 0) {
            if (!(best < checkpoint_best))
                throw NumericalError("sinkhorn_scale: residual stalled at iteration " +
                                     std::to_string(iter) + " (best relative residual " +
                                     std::to_string(best) +
                                     "); matrix is likely not scalable to v");
            checkpoint_best = best;
        }

        if (iter == max_iter) break;
        for (Index x = 0; x < n; ++x) d[x] = std::sqrt(d[x] * v(x) / bd[x]);
    }
    throw NumericalError("sinkhorn_scale: no convergence after " + std::to_string(max_iter) +
                         " iterations (last relative residual " + std::to_string(rel) + ")");
}

EquilibriumKernel scaled_kernel(const SparseSymMatrix& b, const Vector& d, const Measure& v,
                                double alpha, double residual_tol) {
    const Index n = b.size();
    if (n != v.size() || d.size() != n)
        throw std::invalid_argument("scaled_kernel: dimension mismatch");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("scaled_kernel: alpha must lie in [0, 1)");
    if (!(residual_tol > 0.0))
        throw std::invalid_argument("scaled_kernel: residual_tol must be positive");
    for (Index x = 0; x < n; ++x)
        if (!(d[x] > 0.0)) throw std::invalid_argument("scaled_kernel: d must be positive");

    const StructuredMatrix bt(b, alpha);
    const Vector bd = bt.matvec(d);
    double res = 0.0;
    for (Index x = 0; x < n; ++x) res = std::max(res, std::abs(d[x] * bd[x] - v(x)));
    if (res > residual_tol)
        throw NumericalError("scaled_kernel: scaling residual " + std::to_string(res) +
                             " exceeds " + std::to_string(residual_tol));

    // Sparse part (1-alpha) d(x) B(x,y) d(y) / (v(x) v(y)); the rank-one
    // tail (alpha/N) (d/v)(d/v)^T lives inside the structured kernel.
    std::vector<Triplet> trips;
    trips.reserve(b.nonzeros());
    const SpMat& m = b.eigen();
    const double mix = 1.0 - alpha;
    // Grouped so the (x, y) and (y, x) evaluations agree bitwise.
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            trips.emplace_back(it.row(), j,
                               mix * ((d[it.row()] * d[j]) * it.value()) / (v(it.row()) * v(j)));
    SpMat s(n, n);
    s.setFromTriplets(trips.begin(), trips.end());
    s.makeCompressed();
    return EquilibriumKernel::structured(SparseSymMatrix::from_sparse(std::move(s)), d, v, alpha,
                                         1.0);
}

EquilibriumKernel sinkhorn_kernel(const SparseSymMatrix& b, const Measure& v, double alpha,
                                  double tol, int max_iter) {
    const SparseSymMatrix b2 = square(b);
    const ScalingResult r = sinkhorn_scale(pagerank_augment(b2, alpha), v, tol, max_iter);
    return scaled_kernel(b2, r.d, v, alpha);
}

}  // namespace lejaq
