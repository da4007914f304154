#include "lejaq/kernel.hpp"

#include "lejaq/rng.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <vector>

namespace lejaq {

// ---------------------------------------------------------------------------
// EquilibriumKernel

double EquilibriumKernel::entry(Index x, Index y) const {
    switch (form_) {
        case KernelForm::Dense:
            return dense_(x, y);
        case KernelForm::Sparse:
            return sparse_.coeff(x, y);
        case KernelForm::Structured:
            return sparse_.coeff(x, y) + rank_one_term(x, y);
    }
    return 0.0;
}

Vector EquilibriumKernel::column(Index x) const {
    if (x < 0 || x >= size()) throw std::invalid_argument("column: index out of range");
    switch (form_) {
        case KernelForm::Dense:
            return dense_.col(x);
        case KernelForm::Sparse:
            return sparse_.column(x);
        case KernelForm::Structured: {
            Vector col(size());
            for (Index r = 0; r < size(); ++r) col[r] = rank_one_term(r, x);
            sparse_.for_each_in_column(x, [&](Index r, double val) { col[r] += val; });
            return col;
        }
    }
    return Vector();
}

void EquilibriumKernel::add_column(Index x, Vector& accum) const {
    if (accum.size() != size()) throw std::invalid_argument("add_column: dimension mismatch");
    const Vector col = column(x);
    accum += col;
}

Vector EquilibriumKernel::matvec(const Vector& y) const {
    if (y.size() != size()) throw std::invalid_argument("matvec: dimension mismatch");
    switch (form_) {
        case KernelForm::Dense:
            return dense_ * y;
        case KernelForm::Sparse:
            return sparse_.matvec(y);
        case KernelForm::Structured: {
            Vector out = sparse_.matvec(y);
            out += (c_scale_ * c_.dot(y)) * c_;
            return out;
        }
    }
    return Vector();
}

double EquilibriumKernel::quadratic(const Vector& mu, const Vector& nu) const {
    if (mu.size() != size() || nu.size() != size())
        throw std::invalid_argument("quadratic: dimension mismatch");
    switch (form_) {
        case KernelForm::Dense:
            return mu.dot(dense_ * nu);
        case KernelForm::Sparse:
            return quadratic_form(sparse_, mu, nu);
        case KernelForm::Structured:
            return quadratic_form(sparse_, mu, nu) + c_scale_ * c_.dot(mu) * c_.dot(nu);
    }
    return 0.0;
}

Vector EquilibriumKernel::diagonal() const {
    Vector d(size());
    for (Index x = 0; x < size(); ++x) d[x] = entry(x, x);
    return d;
}

NormReport EquilibriumKernel::norms() const {
    switch (form_) {
        case KernelForm::Dense: {
            NormReport r;
            for (Index x = 0; x < size(); ++x) {
                const double row = dense_.row(x).cwiseAbs().sum();
                const double dia = std::abs(dense_(x, x));
                r.diag_max = std::max(r.diag_max, dia);
                r.row_sum = std::max(r.row_sum, row);
                r.offdiag_row_sum = std::max(r.offdiag_row_sum, row - dia);
            }
            return r;
        }
        case KernelForm::Sparse:
            return lejaq::norms(sparse_);
        case KernelForm::Structured: {
            // All entries are non-negative by construction, so absolute row
            // sums are plain row sums, available through one matvec.
            const Vector row = matvec(Vector::Ones(size()));
            const Vector dia = diagonal();
            NormReport r;
            for (Index x = 0; x < size(); ++x) {
                r.diag_max = std::max(r.diag_max, dia[x]);
                r.row_sum = std::max(r.row_sum, row[x]);
                r.offdiag_row_sum = std::max(r.offdiag_row_sum, row[x] - dia[x]);
            }
            return r;
        }
    }
    return NormReport{};
}

Matrix EquilibriumKernel::to_dense() const {
    switch (form_) {
        case KernelForm::Dense:
            return dense_;
        case KernelForm::Sparse:
            return sparse_.to_dense();
        case KernelForm::Structured: {
            Matrix g(size(), size());
            for (Index y = 0; y < size(); ++y) g.col(y) = column(y);
            return g;
        }
    }
    return Matrix();
}

const Matrix& EquilibriumKernel::dense_part() const {
    if (form_ != KernelForm::Dense) throw std::invalid_argument("dense_part: kernel is not dense");
    return dense_;
}

const SparseSymMatrix& EquilibriumKernel::sparse_part() const {
    if (form_ == KernelForm::Dense) throw std::invalid_argument("sparse_part: kernel is dense");
    return sparse_;
}

const Vector& EquilibriumKernel::rank_one_vector() const {
    if (form_ != KernelForm::Structured)
        throw std::invalid_argument("rank_one_vector: kernel is not structured");
    return c_;
}

const Vector& EquilibriumKernel::scaling() const {
    if (form_ != KernelForm::Structured)
        throw std::invalid_argument("scaling: kernel is not structured");
    return d_;
}

void EquilibriumKernel::finalize(double capacity) {
    capacity_ = capacity;
    deviation_ = (matvec(v_.values()).array() - capacity).abs().maxCoeff();
}

EquilibriumKernel EquilibriumKernel::dense(Matrix g, Measure v, double capacity) {
    if (g.rows() != g.cols() || g.rows() != v.size())
        throw std::invalid_argument("EquilibriumKernel::dense: dimension mismatch");
    for (Index y = 0; y < g.cols(); ++y)
        for (Index x = 0; x < y; ++x)
            if (g(x, y) != g(y, x))
                throw std::invalid_argument("EquilibriumKernel::dense: matrix is not symmetric");
    EquilibriumKernel k(KernelForm::Dense, std::move(v));
    k.dense_ = std::move(g);
    k.nonnegative_ = k.dense_.minCoeff() >= 0.0;
    k.finalize(capacity);
    return k;
}

EquilibriumKernel EquilibriumKernel::sparse(SparseSymMatrix g, Measure v, double capacity) {
    if (g.size() != v.size())
        throw std::invalid_argument("EquilibriumKernel::sparse: dimension mismatch");
    EquilibriumKernel k(KernelForm::Sparse, std::move(v));
    k.sparse_ = std::move(g);
    bool nonneg = true;
    const SpMat& m = k.sparse_.eigen();
    for (Index j = 0; j < m.outerSize() && nonneg; ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            if (it.value() < 0.0) {
                nonneg = false;
                break;
            }
    k.nonnegative_ = nonneg;
    k.finalize(capacity);
    return k;
}

EquilibriumKernel EquilibriumKernel::structured(SparseSymMatrix scaled, Vector scaling, Measure v,
                                                double alpha, double capacity) {
    const Index n = v.size();
    if (scaled.size() != n || scaling.size() != n)
        throw std::invalid_argument("EquilibriumKernel::structured: dimension mismatch");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("EquilibriumKernel::structured: alpha must lie in [0, 1)");
    for (Index x = 0; x < n; ++x)
        if (!(scaling[x] > 0.0))
            throw std::invalid_argument("EquilibriumKernel::structured: scaling must be positive");
    const SpMat& m = scaled.eigen();
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            if (it.value() < 0.0)
                throw std::invalid_argument(
                    "EquilibriumKernel::structured: scaled part must be non-negative");

    EquilibriumKernel k(KernelForm::Structured, std::move(v));
    k.sparse_ = std::move(scaled);
    k.d_ = std::move(scaling);
    k.c_ = Vector(n);
    for (Index x = 0; x < n; ++x) k.c_[x] = k.d_[x] / k.v_(x);
    k.c_scale_ = alpha / static_cast<double>(n);
    k.alpha_ = alpha;
    k.nonnegative_ = true;
    k.finalize(capacity);
    return k;
}

// ---------------------------------------------------------------------------
// Diagonal modification

SparseSymMatrix v_laplacian(const SparseSymMatrix& b, const Measure& v) {
    const Index n = b.size();
    if (n != v.size()) throw std::invalid_argument("v_laplacian: dimension mismatch");
    const Vector bv = b.matvec(v.values());
    Vector w(n);
    for (Index x = 0; x < n; ++x) w[x] = bv[x] / v(x);

    std::vector<Triplet> trips;
    trips.reserve(b.nonzeros() + n);
    std::vector<bool> has_diag(static_cast<size_t>(n), false);
    const SpMat& m = b.eigen();
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SpMat::InnerIterator it(m, j); it; ++it) {
            if (it.row() == j) {
                has_diag[static_cast<size_t>(j)] = true;
                trips.emplace_back(j, j, w[j] - it.value());
            } else {
                trips.emplace_back(it.row(), j, -it.value());
            }
        }
    }
    for (Index x = 0; x < n; ++x)
        if (!has_diag[static_cast<size_t>(x)]) trips.emplace_back(x, x, w[x]);

    SpMat l(n, n);
    l.setFromTriplets(trips.begin(), trips.end());
    l.makeCompressed();
    return SparseSymMatrix::from_sparse(std::move(l));
}

EquilibriumKernel diag_modified_kernel(const SparseSymMatrix& b, const Measure& v, DiagMode mode) {
    const Index n = b.size();
    if (n != v.size()) throw std::invalid_argument("diag_modified_kernel: dimension mismatch");
    if (mode == DiagMode::GraphPreserving) {
        const SpMat& m = b.eigen();
        for (Index j = 0; j < m.outerSize(); ++j)
            for (SpMat::InnerIterator it(m, j); it; ++it)
                if (it.value() < 0.0)
                    throw std::invalid_argument(
                        "diag_modified_kernel: graph-preserving mode needs non-negative weights");
        if (!is_connected(b))
            throw std::invalid_argument(
                "diag_modified_kernel: graph-preserving mode needs a connected graph");
    }

    const SparseSymMatrix b1 = v_laplacian(b, v);
    const double base_norm = (mode == DiagMode::Strict) ? norms(b1).row_sum : norms(b).row_sum;
    if (!(base_norm > 0.0))
        throw std::invalid_argument("diag_modified_kernel: defining norm is zero (degenerate input)");

    const double vinf = v.max_value();
    // G = 2 * base_norm * V^{-1} - B1 over the sparsity of B1 plus the diagonal.
    std::vector<Triplet> trips;
    trips.reserve(b1.nonzeros() + n);
    std::vector<bool> has_diag(static_cast<size_t>(n), false);
    const SpMat& m1 = b1.eigen();
    for (Index j = 0; j < m1.outerSize(); ++j) {
        for (SpMat::InnerIterator it(m1, j); it; ++it) {
            if (it.row() == j) {
                has_diag[static_cast<size_t>(j)] = true;
                trips.emplace_back(j, j, 2.0 * base_norm * vinf / v(j) - it.value());
            } else {
                trips.emplace_back(it.row(), j, -it.value());
            }
        }
    }
    for (Index x = 0; x < n; ++x)
        if (!has_diag[static_cast<size_t>(x)])
            trips.emplace_back(x, x, 2.0 * base_norm * vinf / v(x));

    SpMat g(n, n);
    g.setFromTriplets(trips.begin(), trips.end());
    g.makeCompressed();
    const double capacity = 2.0 * vinf * base_norm;
    return EquilibriumKernel::sparse(SparseSymMatrix::from_sparse(std::move(g)), v, capacity);
}

// ---------------------------------------------------------------------------
// Householder construction

HouseholderReflector HouseholderReflector::between(const Vector& w, const Vector& u) {
    if (w.size() != u.size())
        throw std::invalid_argument("HouseholderReflector: dimension mismatch");
    if (std::abs(w.norm() - 1.0) > 1e-8 || std::abs(u.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("HouseholderReflector: arguments must be unit vectors");
    HouseholderReflector h;
    h.p = w - u;
    const double p2 = h.p.squaredNorm();
    if (p2 == 0.0) {
        h.identity = true;
        return h;
    }
    h.beta = 2.0 / p2;
    return h;
}

Vector HouseholderReflector::apply(const Vector& x) const {
    if (identity) return x;
    if (x.size() != p.size()) throw std::invalid_argument("HouseholderReflector: dimension mismatch");
    return x - (beta * p.dot(x)) * p;
}

Matrix HouseholderReflector::conjugate(const Matrix& b) const {
    if (b.rows() != b.cols()) throw std::invalid_argument("conjugate: matrix must be square");
    if (identity) return b;
    if (b.rows() != p.size()) throw std::invalid_argument("conjugate: dimension mismatch");
    // H B H = B - beta (p q^T + q p^T) + beta^2 (p.q) p p^T with q = B p.
    // Evaluated entrywise so that the (x, y) and (y, x) expressions agree
    // bitwise (products commute, the two cross terms swap places).
    const Vector q = b * p;
    const double gamma = beta * beta * p.dot(q);
    const Index n = b.rows();
    Matrix out(n, n);
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x)
            out(x, y) = b(x, y) - beta * (p[x] * q[y] + q[x] * p[y]) + gamma * (p[x] * p[y]);
    return out;
}

Vector null_vector(const SparseSymMatrix& b, std::uint64_t seed, int max_iterations) {
    const Index n = b.size();
    if (n == 0) throw std::invalid_argument("null_vector: empty matrix");
    if (max_iterations < 1) throw std::invalid_argument("null_vector: max_iterations must be positive");
    const double bnorm = norms(b).row_sum;
    const double threshold = 1e-8 * std::max(1.0, bnorm);
    // The 1e-12 shift keeps the factorization nonsingular; scaling it by the
    // matrix norm keeps it meaningful for badly scaled inputs.
    const double shift = 1e-12 * std::max(1.0, bnorm);

    SpMat shifted = b.eigen();
    SpMat id(n, n);
    id.setIdentity();
    shifted += shift * id;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
        throw NumericalError("null_vector: factorization of the shifted matrix failed");

    Rng rng(seed);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
    x /= x.norm();

    double residual = 0.0;
    for (int iter = 0; iter <= max_iterations; ++iter) {
        residual = b.matvec(x).norm();
        if (residual <= threshold) return x;
        Vector y = lu.solve(x);
        const double ynorm = y.norm();
        if (!std::isfinite(ynorm) || ynorm == 0.0)
            throw NumericalError("null_vector: inverse iteration produced an invalid vector");
        x = y / ynorm;
    }
    throw NumericalError("null_vector: no convergence after " + std::to_string(max_iterations) +
                         " iterations (residual " + std::to_string(residual) + ", threshold " +
                         std::to_string(threshold) + "); matrix may be numerically nonsingular");
}

EquilibriumKernel householder_kernel(const SparseSymMatrix& b, const Measure& v,
                                     std::uint64_t seed) {
    const Index n = b.size();
    if (n != v.size()) throw std::invalid_argument("householder_kernel: dimension mismatch");
    const double bnorm = norms(b).row_sum;
    if (!(bnorm > 0.0))
        throw std::invalid_argument("householder_kernel: defining norm is zero (degenerate input)");

    const Vector u = null_vector(b, seed);
    const Vector vt = v.values() / v.values().norm();
    const HouseholderReflector h = HouseholderReflector::between(u, vt);
    const Matrix b1 = h.conjugate(b.to_dense());

    const double vinf = v.max_value();
    Matrix g = -b1;
    for (Index x = 0; x < n; ++x) g(x, x) += 2.0 * bnorm * vinf / v(x);
    const double capacity = 2.0 * vinf * bnorm;
    return EquilibriumKernel::dense(std::move(g), v, capacity);
}

// ---------------------------------------------------------------------------
// Verification

EquilibriumReport verify_equilibrium(const EquilibriumKernel& g, const Measure& v, double tol) {
    if (g.size() != v.size()) throw std::invalid_argument("verify_equilibrium: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("verify_equilibrium: tol must be positive");
    const Vector pot = g.matvec(v.values());
    EquilibriumReport rep;
    rep.gamma_est = v.values().dot(pot);
    rep.max_deviation = (pot.array() - rep.gamma_est).abs().maxCoeff();
    rep.passed = rep.max_deviation <= tol;
    return rep;
}

bool brualdi_check(const SparseSymMatrix& b, const Measure& v) {
    const Index n = b.size();
    if (n != v.size()) throw std::invalid_argument("brualdi_check: dimension mismatch");
    if (n > 15) throw std::invalid_argument("brualdi_check: enumeration capped at 15 vertices");
    const SpMat& m = b.eigen();
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            if (it.value() < 0.0)
                throw std::invalid_argument("brualdi_check: matrix must be non-negative");

    // neighbor[x]: bitmask of y with B(x, y) != 0 (self loops included).
    std::vector<std::uint32_t> neighbor(static_cast<size_t>(n), 0);
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it)
            neighbor[static_cast<size_t>(it.row())] |= (1u << j);

    constexpr double kEqTol = 1e-12;
    constexpr double kSlack = 1e-15;

    // Trit odometer over assignments of each vertex to S1 (0), S2 (1), S3 (2).
    std::vector<int> part(static_cast<size_t>(n), 0);
    while (true) {
        std::uint32_t mask1 = 0, mask2 = 0, mask3 = 0;
        for (Index x = 0; x < n; ++x) {
            const std::uint32_t bit = 1u << x;
            if (part[static_cast<size_t>(x)] == 0) mask1 |= bit;
            else if (part[static_cast<size_t>(x)] == 1) mask2 |= bit;
            else mask3 |= bit;
        }
        const std::uint32_t mask23 = mask2 | mask3;

        bool premise = true;
        for (Index y = 0; y < n && premise; ++y)
            if ((mask3 >> y) & 1u) premise = (neighbor[static_cast<size_t>(y)] & mask23) == 0;

        if (premise) {
            double s1 = 0.0, s3 = 0.0;
            for (Index x = 0; x < n; ++x) {
                if ((mask1 >> x) & 1u) s1 += v(x);
                if ((mask3 >> x) & 1u) s3 += v(x);
            }
            if (s1 < s3 - kSlack) return false;
            bool zero13 = true;
            const std::uint32_t mask12 = mask1 | mask2;
            for (Index x = 0; x < n && zero13; ++x)
                if ((mask1 >> x) & 1u) zero13 = (neighbor[static_cast<size_t>(x)] & mask12) == 0;
            if ((std::abs(s1 - s3) <= kEqTol) != zero13) return false;
        }

        // Advance the odometer.
        Index pos = 0;
        while (pos < n && part[static_cast<size_t>(pos)] == 2) part[static_cast<size_t>(pos++)] = 0;
        if (pos == n) break;
        ++part[static_cast<size_t>(pos)];
    }
    return true;
}

}  // namespace lejaq
