#include "lejaq/kernel.hpp"
#include "lejaq/measure.hpp"
#include "lejaq/sparse_sym.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace lejaq;

namespace {

SparseSymMatrix swap2() {
    return SparseSymMatrix::from_edges(2, {{0, 1, 1.0}});
}

SparseSymMatrix path3() {
    return SparseSymMatrix::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

Measure half_half() {
    Vector v(2);
    v << 0.5, 0.5;
    return Measure::from_values(v);
}

/// Builds one kernel of each storage form over the same ground set so the
/// bitwise-agreement checks cover every access path.
std::vector<EquilibriumKernel> sample_kernels() {
    std::vector<EquilibriumKernel> out;
    Matrix g(3, 3);
    g << 3.0, 1.0, 0.5, 1.0, 2.5, 1.0, 0.5, 1.0, 3.0;
    out.push_back(EquilibriumKernel::dense(g, Measure::uniform(3), 1.5));
    out.push_back(diag_modified_kernel(path3(), Measure::uniform(3), DiagMode::Strict));
    Vector d(3);
    d << 0.5, 0.25, 0.75;
    out.push_back(EquilibriumKernel::structured(path3(), d, Measure::uniform(3), 0.15, 1.0));
    return out;
}

}  // namespace

TEST_CASE("v laplacian of the two-vertex swap") {
    const SparseSymMatrix l = v_laplacian(swap2(), half_half());
    CHECK(l.coeff(0, 0) == 1.0);
    CHECK(l.coeff(1, 1) == 1.0);
    CHECK(l.coeff(0, 1) == -1.0);
    const Vector z = l.matvec(half_half().values());
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);

    // Annihilates its measure for a bigger asymmetric-weight example too.
    Vector v3(3);
    v3 << 0.2, 0.5, 0.3;
    const Measure m3 = Measure::from_values(v3);
    const SparseSymMatrix l3 = v_laplacian(path3(), m3);
    CHECK(l3.matvec(v3).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("strict diagonal modification on the swap graph") {
    const EquilibriumKernel k = diag_modified_kernel(swap2(), half_half(), DiagMode::Strict);
    CHECK(k.form() == KernelForm::Sparse);
    CHECK(k.entry(0, 0) == 3.0);
    CHECK(k.entry(1, 1) == 3.0);
    CHECK(k.entry(0, 1) == 1.0);
    CHECK(k.capacity() == 2.0);
    CHECK(k.capacity_deviation() == 0.0);
    CHECK(k.nonnegative());
    const Vector pot = k.matvec(half_half().values());
    CHECK(pot[0] == 2.0);
    CHECK(pot[1] == 2.0);
}

TEST_CASE("graph-preserving diagonal modification on the swap graph") {
    const EquilibriumKernel k =
        diag_modified_kernel(swap2(), half_half(), DiagMode::GraphPreserving);
    CHECK(k.entry(0, 0) == 1.0);
    CHECK(k.entry(1, 1) == 1.0);
    CHECK(k.entry(0, 1) == 1.0);
    CHECK(k.capacity() == 1.0);
    CHECK(k.nonnegative());
}

TEST_CASE("graph-preserving mode validates its input") {
    CHECK_THROWS_AS(diag_modified_kernel(SparseSymMatrix::from_edges(2, {{0, 1, -1.0}}),
                                         half_half(), DiagMode::GraphPreserving),
                    std::invalid_argument);
    CHECK_THROWS_AS(diag_modified_kernel(SparseSymMatrix::from_edges(3, {{0, 1, 1.0}}),
                                         Measure::uniform(3), DiagMode::GraphPreserving),
                    std::invalid_argument);
    // A zero matrix has no defining norm in either mode.
    CHECK_THROWS_AS(
        diag_modified_kernel(SparseSymMatrix::from_edges(2, {}), half_half(), DiagMode::Strict),
        std::invalid_argument);
}

TEST_CASE("storage forms agree bitwise on every access path") {
    for (const EquilibriumKernel& k : sample_kernels()) {
        const Index n = k.size();
        const Matrix dense = k.to_dense();
        for (Index x = 0; x < n; ++x) {
            const Vector col = k.column(x);
            Vector accum = Vector::Zero(n);
            k.add_column(x, accum);
            for (Index y = 0; y < n; ++y) {
                CHECK(k.entry(x, y) == col[y]);
                CHECK(accum[y] == col[y]);
                CHECK(dense(y, x) == col[y]);
                CHECK(k.entry(x, y) == k.entry(y, x));
            }
        }
        Vector y(n);
        y << 0.3, -0.2, 0.9;
        const Vector a = k.matvec(y);
        const Vector b = dense * y;
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff());
        Vector mu(n), nu(n);
        mu << 1.0, 2.0, -1.0;
        nu << 0.5, 0.0, 1.0;
        CHECK(k.quadratic(mu, nu) ==
              doctest::Approx(mu.dot(dense * nu)).epsilon(1e-12));
        CHECK((k.diagonal() - dense.diagonal()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("structured kernels add the rank-one tail") {
    Vector d(3);
    d << 0.5, 0.25, 0.75;
    const EquilibriumKernel k =
        EquilibriumKernel::structured(path3(), d, Measure::uniform(3), 0.15, 1.0);
    CHECK(k.form() == KernelForm::Structured);
    CHECK(k.alpha() == 0.15);
    // entry(0,2) has no sparse contribution, only (alpha/n) c_0 c_2.
    const double c0 = d[0] * 3.0, c2 = d[2] * 3.0;
    CHECK(k.entry(0, 2) == doctest::Approx((0.15 / 3.0) * c0 * c2).epsilon(1e-15));
    CHECK(k.rank_one_vector()[0] == doctest::Approx(c0).epsilon(1e-15));
    CHECK(k.scaling()[1] == 0.25);

    Vector bad = d;
    bad[1] = 0.0;
    CHECK_THROWS_AS(EquilibriumKernel::structured(path3(), bad, Measure::uniform(3), 0.15, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(EquilibriumKernel::structured(path3(), d, Measure::uniform(3), 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("dense factory rejects asymmetry") {
    Matrix g(2, 2);
    g << 1.0, 2.0, 2.0000001, 1.0;
    CHECK_THROWS_AS(EquilibriumKernel::dense(g, half_half(), 1.0), std::invalid_argument);
}

TEST_CASE("householder reflector") {
    Vector w(3), u(3);
    w << 1.0, 0.0, 0.0;
    u << 0.0, 1.0, 0.0;
    const HouseholderReflector h = HouseholderReflector::between(w, u);
    CHECK_FALSE(h.identity);
    CHECK((h.apply(w) - u).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((h.apply(u) - w).cwiseAbs().maxCoeff() <= 1e-15);
    // Vectors orthogonal to w - u are fixed.
    Vector t(3);
    t << 1.0, 1.0, 0.5;
    CHECK((h.apply(h.apply(t)) - t).cwiseAbs().maxCoeff() <= 1e-14);

    const HouseholderReflector id = HouseholderReflector::between(w, w);
    CHECK(id.identity);
    CHECK((id.apply(t) - t).cwiseAbs().maxCoeff() == 0.0);

    Vector long_w = 2.0 * w;
    CHECK_THROWS_AS(HouseholderReflector::between(long_w, u), std::invalid_argument);

    Matrix b(3, 3);
    b << 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0;
    const Matrix hbh = h.conjugate(b);
    for (Index x = 0; x < 3; ++x)
        for (Index y = 0; y < 3; ++y) CHECK(hbh(x, y) == hbh(y, x));
    // Conjugation preserves the trace.
    CHECK(hbh.trace() == doctest::Approx(b.trace()).epsilon(1e-14));
}

TEST_CASE("null vector of the path laplacian") {
    const SparseSymMatrix l = graph_laplacian(path3());
    const Vector x = null_vector(l);
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const double c = 1.0 / std::sqrt(3.0);
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(x[i]) == doctest::Approx(c).epsilon(1e-6));
    CHECK(l.matvec(x).norm() <= 1e-8 * std::max(1.0, norms(l).row_sum));

    // A clearly nonsingular matrix has no null vector to find.
    const SparseSymMatrix pd =
        SparseSymMatrix::from_edges(2, {{0, 0, 3.0}, {1, 1, 3.0}, {0, 1, 1.0}});
    CHECK_THROWS_AS(null_vector(pd), NumericalError);
}

TEST_CASE("householder kernel on the path laplacian") {
    const SparseSymMatrix l = graph_laplacian(path3());
    CHECK(norms(l).row_sum == 4.0);
    const Measure v = Measure::uniform(3);
    const EquilibriumKernel k = householder_kernel(l, v);
    CHECK(k.form() == KernelForm::Dense);
    CHECK(k.capacity() == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    const EquilibriumReport rep = verify_equilibrium(k, v, 1e-8);
    CHECK(rep.passed);
    CHECK(rep.gamma_est == doctest::Approx(8.0 / 3.0).epsilon(1e-10));

    // The construction shifts the spectrum above the defining norm.
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.to_dense());
    CHECK(es.eigenvalues().minCoeff() >= 4.0 - 1e-6);
}

TEST_CASE("equilibrium verification catches a wrong measure") {
    Matrix g(2, 2);
    g << 3.0, 1.0, 1.0, 3.0;
    Vector skew(2);
    skew << 0.25, 0.75;
    const Measure vs = Measure::from_values(skew);
    const EquilibriumKernel k = EquilibriumKernel::dense(g, vs, 2.25);
    const EquilibriumReport rep = verify_equilibrium(k, vs, 1e-8);
    CHECK_FALSE(rep.passed);
    CHECK(rep.max_deviation == doctest::Approx(0.75).epsilon(1e-12));

    const EquilibriumKernel ok = EquilibriumKernel::dense(g, half_half(), 2.0);
    CHECK(verify_equilibrium(ok, half_half(), 1e-8).passed);
}

TEST_CASE("diagonal scalability test") {
    CHECK_FALSE(brualdi_check(SparseSymMatrix::from_edges(2, {}), Measure::uniform(2)));
    CHECK(brualdi_check(SparseSymMatrix::from_edges(2, {{0, 0, 1.0}, {1, 1, 1.0}}),
                        Measure::uniform(2)));

    // The path scales onto (1/4, 1/2, 1/4) but not onto the uniform measure:
    // the two endpoints form an independent set that must carry no more mass
    // than its neighborhood.
    Vector good(3);
    good << 0.25, 0.5, 0.25;
    CHECK(brualdi_check(path3(), Measure::from_values(good)));
    CHECK_FALSE(brualdi_check(path3(), Measure::uniform(3)));

    const SparseSymMatrix big = SparseSymMatrix::from_edges(16, {{0, 15, 1.0}});
    CHECK_THROWS_AS(brualdi_check(big, Measure::uniform(16)), std::invalid_argument);
}
