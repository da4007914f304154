#pragma once

#include "lejaq/measure.hpp"
#include "lejaq/sparse_sym.hpp"
#include "lejaq/types.hpp"

#include <cstdint>

namespace lejaq {

enum class KernelForm { Dense, Sparse, Structured };

/// Symmetric kernel matrix G with a prescribed equilibrium measure v:
/// G v = capacity * 1 up to the recorded deviation.  Three storage forms
/// share one interface; the structured form keeps a sparse part S plus a
/// rank-one tail, G = S + (alpha/N) c c^T, and never materializes G.
///
/// entry, column, add_column and to_dense evaluate the same floating-point
/// expression, so greedy selections driven by any of them agree bitwise.
class EquilibriumKernel {
public:
    KernelForm form() const { return form_; }
    Index size() const { return v_.size(); }
    const Measure& measure() const { return v_; }
    double capacity() const { return capacity_; }

    /// Max-norm of G v - capacity * 1, measured at construction.
    double capacity_deviation() const { return deviation_; }

    /// Mixing weight of the rank-one tail; zero for dense and sparse forms.
    double alpha() const { return alpha_; }

    /// True when every entry of G is >= 0.
    bool nonnegative() const { return nonnegative_; }

    double entry(Index x, Index y) const;
    Vector column(Index x) const;

    /// accum += column(x), without reusing accum's storage for scratch.
    void add_column(Index x, Vector& accum) const;

    Vector matvec(const Vector& y) const;

    /// Bilinear energy mu^T G nu.
    double quadratic(const Vector& mu, const Vector& nu) const;

    Vector diagonal() const;
    NormReport norms() const;

    /// Full materialization; intended for small instances and cross-checks.
    Matrix to_dense() const;

    const Matrix& dense_part() const;
    const SparseSymMatrix& sparse_part() const;

    /// Structured form only: the vector c = d / v of the rank-one tail.
    const Vector& rank_one_vector() const;

    /// Structured form only: the diagonal scaling d.
    const Vector& scaling() const;

    static EquilibriumKernel dense(Matrix g, Measure v, double capacity);
    static EquilibriumKernel sparse(SparseSymMatrix g, Measure v, double capacity);

    /// G = scaled + (alpha/N) c c^T with c = scaling / v, computed here so
    /// every construction and deserialization path agrees bitwise.
    static EquilibriumKernel structured(SparseSymMatrix scaled, Vector scaling, Measure v,
                                        double alpha, double capacity);

private:
    EquilibriumKernel(KernelForm form, Measure v) : form_(form), v_(std::move(v)) {}
    double rank_one_term(Index x, Index y) const { return c_scale_ * (c_[x] * c_[y]); }
    void finalize(double capacity);

    KernelForm form_;
    Measure v_;
    Matrix dense_;
    SparseSymMatrix sparse_;
    Vector c_;
    Vector d_;
    double c_scale_ = 0.0;
    double alpha_ = 0.0;
    double capacity_ = 0.0;
    double deviation_ = 0.0;
    bool nonnegative_ = false;
};

/// L_v(B) = diag(w) - B with w(x) = (Bv)(x) / v(x); satisfies L_v(B) v = 0
/// up to roundoff for any symmetric B.
SparseSymMatrix v_laplacian(const SparseSymMatrix& b, const Measure& v);

enum class DiagMode {
    Strict,          ///< G = 2 |||L_v(B)||| V^{-1} - L_v(B); any symmetric B
    GraphPreserving  ///< G = 2 |||B||| V^{-1} - L_v(B); non-negative connected B,
                     ///< keeps B's off-diagonal sparsity and sign
};

/// Diagonal-modification kernel with V = diag(v / max(v)) and capacity
/// 2 max(v) times the defining norm.  Strict mode is diagonally dominant and
/// positive definite; graph-preserving mode is entrywise non-negative.
EquilibriumKernel diag_modified_kernel(const SparseSymMatrix& b, const Measure& v, DiagMode mode);

/// Reflection H = I - 2 p p^T / ||p||^2 with p = w - u, mapping w to u and
/// back.  w == u (bitwise) degenerates to the identity.
struct HouseholderReflector {
    Vector p;
    double beta = 0.0;  ///< 2 / ||p||^2
    bool identity = false;

    /// Both arguments must be unit vectors (2-norm, tolerance 1e-8).
    static HouseholderReflector between(const Vector& w, const Vector& u);

    Vector apply(const Vector& x) const;

    /// H b H for symmetric b; the result is exactly symmetric because each
    /// entry is evaluated by a formula invariant under (x, y) swap.
    Matrix conjugate(const Matrix& b) const;
};

inline constexpr std::uint64_t kNullVectorSeed = 0x6e756c6c76656321ULL;

/// Unit null vector of a numerically singular symmetric matrix, computed by
/// regularized inverse power iteration.  Converged means
/// ||B x||_2 <= 1e-8 * max(1, |||B|||).
Vector null_vector(const SparseSymMatrix& b, std::uint64_t seed = kNullVectorSeed,
                   int max_iterations = 200);

/// Dense kernel G = 2 |||B||| V^{-1} - H B H where H swaps B's null vector
/// with v / ||v||_2.  B must be symmetric and numerically singular; the
/// kernel keeps B's eigenvalues shifted into the positive half-line.
EquilibriumKernel householder_kernel(const SparseSymMatrix& b, const Measure& v,
                                     std::uint64_t seed = kNullVectorSeed);

struct EquilibriumReport {
    double gamma_est = 0.0;      ///< v . (G v)
    double max_deviation = 0.0;  ///< max |(G v)(x) - gamma_est|
    bool passed = false;
};

/// Checks that v is an equilibrium measure of G: the potential G v must be
/// constant to within tol.
EquilibriumReport verify_equilibrium(const EquilibriumKernel& g, const Measure& v, double tol);

/// Exact test for the existence of a positive diagonal D with D B D 1 = v:
/// for every partition (S1, S2, S3) of the vertices with B[S2 u S3, S3] = 0,
/// sum(v on S1) >= sum(v on S3), with equality iff B[S1, S1 u S2] = 0.
/// Enumeration is exponential; n is capped at 15.  Sum comparisons use
/// tolerance 1e-12 for equality and 1e-15 of slack for the inequality.
bool brualdi_check(const SparseSymMatrix& b, const Measure& v);

}  // namespace lejaq
