#pragma once

#include "lejaq/kernel.hpp"
#include "lejaq/measure.hpp"
#include "lejaq/sparse_sym.hpp"

namespace lejaq {

/// (1 - alpha) B + (alpha / N) 1 1^T, kept in factored form; matvec and
/// entry access cost O(nnz(B) + N) and O(1).
class StructuredMatrix {
public:
    /// alpha in [0, 1); alpha = 0 degenerates to plain B.
    StructuredMatrix(SparseSymMatrix base, double alpha);

    Index size() const { return base_.size(); }
    double alpha() const { return alpha_; }
    const SparseSymMatrix& base() const { return base_; }

    Vector matvec(const Vector& x) const;
    double entry(Index x, Index y) const;
    Matrix to_dense() const;

private:
    SparseSymMatrix base_;
    double alpha_ = 0.0;
};

/// Mixes a non-negative symmetric matrix with the flat rank-one matrix,
/// making every entry positive; alpha must lie strictly inside (0, 1).
StructuredMatrix pagerank_augment(const SparseSymMatrix& b, double alpha);

struct ScalingResult {
    Vector d;               ///< positive diagonal with d . (Bt d) = v
    int iterations = 0;     ///< number of multiplicative updates performed
    double residual = 0.0;  ///< max |d(x) (Bt d)(x) - v(x)| at acceptance
};

/// Symmetric diagonal scaling by fixed-point iteration
/// d <- sqrt(d * v / (Bt d)).  Convergence is declared on the v-relative
/// residual max |d (Bt d) - v| / v <= tol, which also caps the absolute
/// residual by tol since v sums to one.  The best residual so far must keep
/// improving between periodic checkpoints; a stall aborts with diagnostics.
ScalingResult sinkhorn_scale(const StructuredMatrix& bt, const Measure& v, double tol = 1e-10,
                             int max_iter = 100000);

/// Kernel G with G v = 1: G = (1-alpha) V^{-1} D B D V^{-1}
///                            + (alpha/N) (d/v) (d/v)^T,  V = diag(v).
/// d must come from a converged scaling of (1-alpha) B + (alpha/N) 1 1^T
/// against v; the residual is re-checked against residual_tol.
EquilibriumKernel scaled_kernel(const SparseSymMatrix& b, const Vector& d, const Measure& v,
                                double alpha, double residual_tol = 1e-8);

/// One-call rescaled kernel over the *squared* graph: scales
/// (1-alpha) B^2 + (alpha/N) 1 1^T against v and wraps the result.  B^2 is a
/// Gram matrix, so the kernel's spectrum is non-negative no matter how
/// indefinite B itself is; greedy selection on a kernel whose diagonal dips
/// below its capacity can stall on a single vertex, and squaring rules that
/// out.  The experiment harness and the command-line kernel builder both run
/// this construction.
EquilibriumKernel sinkhorn_kernel(const SparseSymMatrix& b, const Measure& v, double alpha,
                                  double tol = 1e-10, int max_iter = 100000);

}  // namespace lejaq
