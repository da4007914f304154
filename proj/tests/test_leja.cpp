#include "lejaq/kernel.hpp"
#include "lejaq/leja.hpp"
#include "lejaq/measure.hpp"
#include "lejaq/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace lejaq;

namespace {

EquilibriumKernel kernel2() {
    Matrix g(2, 2);
    g << 3.0, 1.0, 1.0, 3.0;
    return EquilibriumKernel::dense(g, Measure::uniform(2), 2.0);
}

}  // namespace

TEST_CASE("greedy selection alternates on the two-vertex kernel") {
    const EquilibriumKernel k = kernel2();
    const LejaSequence seq = leja_sequence(k, 4);
    REQUIRE(seq.size() == 4);
    CHECK(seq.points == std::vector<Index>{0, 1, 0, 1});
    REQUIRE(seq.step_minima.size() == 4);
    CHECK(seq.step_minima[0] == 0.0);
    CHECK(seq.step_minima[1] == 1.0);
    CHECK(seq.step_minima[2] == 4.0);
    CHECK(seq.step_minima[3] == 5.0);
    CHECK(seq.potential[0] == 8.0);
    CHECK(seq.potential[1] == 8.0);
    const Vector emp = empirical_vector(seq, 4);
    CHECK(emp[0] == 0.5);
    CHECK(emp[1] == 0.5);
}

TEST_CASE("start policies") {
    const EquilibriumKernel k = kernel2();
    CHECK(leja_sequence(k, 1, StartPolicy::at(1)).points[0] == 1);
    CHECK(leja_sequence(k, 1, StartPolicy::random(9)).points[0] ==
          leja_sequence(k, 1, StartPolicy::random(9)).points[0]);
    CHECK_THROWS_AS(leja_sequence(k, 1, StartPolicy::at(5)), std::invalid_argument);
    CHECK_THROWS_AS(leja_sequence(k, 0), std::invalid_argument);

    CHECK(StartPolicy::min_diagonal().describe() == "min_diag");
    CHECK(StartPolicy::at(3).describe() == "vertex:3");
    CHECK(StartPolicy::random(17).describe() == "random:17");
    CHECK(StartPolicy::parse("vertex:3").vertex == 3);
    CHECK(StartPolicy::parse("random:17").seed == 17);
    CHECK(StartPolicy::parse("min_diag").kind == StartPolicy::Kind::MinDiagonal);
    CHECK_THROWS_AS(StartPolicy::parse("sideways"), std::invalid_argument);
    CHECK_THROWS_AS(StartPolicy::parse("vertex:x"), std::invalid_argument);
}

TEST_CASE("scan order controls tie-breaks") {
    const EquilibriumKernel k = kernel2();
    const std::vector<Index> order{1, 0};
    const LejaSequence seq = leja_sequence(k, 2, StartPolicy::min_diagonal(), &order);
    CHECK(seq.points[0] == 1);  // diagonal tie resolved by scan order
    CHECK(seq.points[1] == 0);

    const std::vector<Index> dup{0, 0};
    CHECK_THROWS_AS(leja_sequence(k, 2, StartPolicy::min_diagonal(), &dup),
                    std::invalid_argument);
    const std::vector<Index> oob{0, 2};
    CHECK_THROWS_AS(leja_sequence(k, 2, StartPolicy::min_diagonal(), &oob),
                    std::invalid_argument);
}

TEST_CASE("relabeling the vertices relabels the selection") {
    // Integer entries make every potential update exact, so the relabeled
    // run must match the original step for step, bitwise.
    Matrix g(5, 5);
    g << 5, 1, 2, 0, 1,  //
        1, 6, 1, 3, 0,   //
        2, 1, 4, 1, 1,   //
        0, 3, 1, 7, 2,   //
        1, 0, 1, 2, 5;
    const std::vector<Index> p{2, 0, 4, 1, 3};  // new label of each old vertex
    Matrix gp(5, 5);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j) gp(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]) = g(i, j);

    const EquilibriumKernel ka = EquilibriumKernel::dense(g, Measure::uniform(5), 1.0);
    const EquilibriumKernel kb = EquilibriumKernel::dense(gp, Measure::uniform(5), 1.0);
    const LejaSequence sa = leja_sequence(ka, 12);
    // Scan the relabeled graph in the image of ascending original order.
    std::vector<Index> order(5);
    for (Index i = 0; i < 5; ++i) order[static_cast<size_t>(i)] = p[static_cast<size_t>(i)];
    const LejaSequence sb = leja_sequence(kb, 12, StartPolicy::min_diagonal(), &order);
    REQUIRE(sb.size() == sa.size());
    for (Index k = 0; k < sa.size(); ++k) {
        CHECK(sb.points[static_cast<size_t>(k)] ==
              p[static_cast<size_t>(sa.points[static_cast<size_t>(k)])]);
        CHECK(sb.step_minima[static_cast<size_t>(k)] == sa.step_minima[static_cast<size_t>(k)]);
    }
}

TEST_CASE("estimators over a short sequence") {
    const EquilibriumKernel k = kernel2();
    const LejaSequence seq = leja_sequence(k, 4);
    Vector f(2);
    f << 2.0, 4.0;
    CHECK(equal_weight_estimate(f, seq, 3) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(equal_weight_estimate(f, seq, 5), std::invalid_argument);

    Vector f2(2);
    f2 << 1.0, 2.0;
    CHECK(summability_estimate(f2, seq, 3) == 4.0 / 3.0);
    CHECK_THROWS_AS(summability_estimate(f2, seq, 1), std::invalid_argument);
}

TEST_CASE("monte carlo estimate is reproducible and matches inverse-cdf sampling") {
    Vector vals(3);
    vals << 0.5, 0.25, 0.25;
    const Measure v = Measure::from_values(vals);
    Vector f(3);
    f << 1.0, 10.0, 100.0;
    const double a = monte_carlo_estimate(f, v, 64, 42);
    CHECK(a == monte_carlo_estimate(f, v, 64, 42));
    CHECK(a != monte_carlo_estimate(f, v, 64, 43));

    std::vector<double> cum(3);
    double total = 0.0;
    for (Index x = 0; x < 3; ++x) {
        total += v(x);
        cum[static_cast<size_t>(x)] = total;
    }
    Rng rng(42);
    double acc = 0.0;
    for (Index k = 0; k < 64; ++k) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const Index x = std::min<Index>(static_cast<Index>(it - cum.begin()), 2);
        acc += f[x];
    }
    CHECK(a == acc / 64.0);
}

TEST_CASE("potential discrepancy of equal and triangular weights") {
    const EquilibriumKernel k = kernel2();
    const LejaSequence seq = leja_sequence(k, 4);
    CHECK(potential_discrepancy(k, k.measure(), seq, 2, PotentialWeights::Equal) == 0.0);
    CHECK(potential_discrepancy(k, k.measure(), seq, 2, PotentialWeights::Triangular) == 1.0);
    CHECK_THROWS_AS(potential_discrepancy(k, k.measure(), seq, 1, PotentialWeights::Triangular),
                    std::invalid_argument);
}

TEST_CASE("energy distance of the empirical measure") {
    const EquilibriumKernel k = kernel2();
    const LejaSequence seq = leja_sequence(k, 4);
    CHECK(energy_distance(k, k.measure(), seq, 2) == 0.0);
    CHECK(energy_distance(k, k.measure(), seq, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("witness recovery by conjugate gradients") {
    const EquilibriumKernel k = kernel2();
    Vector w0(2);
    w0 << 0.3, -0.2;
    const Vector f = k.matvec(w0);
    CHECK(f[0] == doctest::Approx(0.7).epsilon(1e-15));
    const WitnessResult r = witness_l1(k, f);
    CHECK(r.l1 == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.w[0] == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(r.residual <= 1e-10 * 0.7);

    const WitnessResult z = witness_l1(k, Vector::Zero(2));
    CHECK(z.l1 == 0.0);

    // An indefinite matrix produces a direction of negative curvature.
    Matrix ind(2, 2);
    ind << 0.0, 1.0, 1.0, 0.0;
    const EquilibriumKernel bad = EquilibriumKernel::dense(ind, Measure::uniform(2), 0.5);
    Vector g(2);
    g << 1.0, -1.0;
    CHECK_THROWS_AS(witness_l1(bad, g), NumericalError);
}

TEST_CASE("a priori error cap arithmetic") {
    const EquilibriumKernel k = kernel2();  // operator norm bound 4
    CHECK(bound_quadest(k, 0.5, 3) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(bound_quadest(k, 0.0, 3) == 0.0);
}

TEST_CASE("sequence save, load and replay") {
    const EquilibriumKernel k = kernel2();
    const LejaSequence seq = leja_sequence(k, 4);
    SequenceHeader h;
    h.kernel_hash = "fnv1a64:0123456789abcdef";
    h.start = "min_diag";
    h.n = 4;

    std::ostringstream out;
    save_sequence(seq, h, out);
    const std::string text = out.str();
    CHECK(text.rfind("# lejaq.sequence.v1\n", 0) == 0);

    std::istringstream in(text);
    const LoadedSequence loaded = load_sequence(in);
    CHECK(loaded.header.kernel_hash == h.kernel_hash);
    CHECK(loaded.header.start == "min_diag");
    CHECK(loaded.header.n == 4);
    CHECK(loaded.points == seq.points);

    const LejaSequence rep = replay_sequence(k, loaded.points);
    CHECK(rep.points == seq.points);
    CHECK(rep.step_minima == seq.step_minima);
    CHECK((rep.potential - seq.potential).cwiseAbs().maxCoeff() == 0.0);

    std::ostringstream again;
    save_sequence(rep, h, again);
    CHECK(again.str() == text);

    std::istringstream no_magic("0\n1\n");
    CHECK_THROWS_WITH_AS(load_sequence(no_magic), doctest::Contains("magic"),
                         std::invalid_argument);
    std::istringstream bad_id("# lejaq.sequence.v1\nzero\n");
    CHECK_THROWS_WITH_AS(load_sequence(bad_id), doctest::Contains("bad vertex id"),
                         std::invalid_argument);
    std::istringstream wrong_n("# lejaq.sequence.v1\n# n 3\n0\n1\n");
    CHECK_THROWS_WITH_AS(load_sequence(wrong_n), doctest::Contains("does not match"),
                         std::invalid_argument);
    CHECK_THROWS_AS(replay_sequence(k, {0, 7}), std::invalid_argument);
}
