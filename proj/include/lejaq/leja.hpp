#pragma once

#include "lejaq/kernel.hpp"
#include "lejaq/measure.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lejaq {

/// How the first point of a greedy sequence is chosen.
struct StartPolicy {
    enum class Kind { MinDiagonal, Explicit, Random };

    Kind kind = Kind::MinDiagonal;
    Index vertex = 0;        ///< Explicit only
    std::uint64_t seed = 0;  ///< Random only

    static StartPolicy min_diagonal() { return {}; }
    static StartPolicy at(Index v) { return {Kind::Explicit, v, 0}; }
    static StartPolicy random(std::uint64_t seed) { return {Kind::Random, 0, seed}; }

    std::string describe() const;

    /// Inverse of describe: "min_diag", "vertex:<id>" or "random:<seed>".
    static StartPolicy parse(const std::string& text);
};

/// Greedily selected points together with running bookkeeping.
struct LejaSequence {
    std::vector<Index> points;

    /// Sum of the kernel columns of all selected points,
    /// potential = sum_{j < points.size()} G(., a_j).
    Vector potential;

    /// step_minima[k] is the potential value at a_k at the moment it was
    /// selected, i.e. min_x sum_{j<k} G(x, a_j); step_minima[0] = 0.
    std::vector<double> step_minima;

    Index size() const { return static_cast<Index>(points.size()); }
};

/// Picks n points, each minimizing the potential of the previously selected
/// ones; repetition is allowed.  Ties go to the earliest vertex in scan
/// order (ascending ids unless scan_order is given).  The potential is
/// updated incrementally with one kernel column per step.
LejaSequence leja_sequence(const EquilibriumKernel& g, Index n, StartPolicy start = {},
                           const std::vector<Index>* scan_order = nullptr);

/// Empirical measure of the first n points, as a vector of weights.
Vector empirical_vector(const LejaSequence& seq, Index n);

/// (1/n) sum_{j<n} f(a_j).
double equal_weight_estimate(const Vector& f, const LejaSequence& seq, Index n);

/// sum_j w_j f(a_j) with triangular weights w_j = 2(n-1-j) / (n(n-1)) for
/// j <= n-2 (and w_{n-1} = 0); the weights sum to one.  Requires n >= 2.
double summability_estimate(const Vector& f, const LejaSequence& seq, Index n);

/// (1/n) sum f(x_k) with x_k drawn i.i.d. from v by inverse CDF.
double monte_carlo_estimate(const Vector& f, const Measure& v, Index n, std::uint64_t seed);

enum class PotentialWeights { Equal, Triangular };

/// max_x |sum_j w_j G(x, a_j) - (G v)(x)| over the first n points, with
/// equal weights 1/n or the triangular weights of summability_estimate.
double potential_discrepancy(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                             Index n, PotentialWeights weights = PotentialWeights::Equal);

/// Energy of the signed measure sigma_n - v, where sigma_n is the empirical
/// measure of the first n points.
double energy_distance(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                       Index n);

struct WitnessResult {
    Vector w;
    double l1 = 0.0;         ///< ||w||_1
    int iterations = 0;
    double residual = 0.0;   ///< max-norm of G w - f at acceptance
};

/// Solves G w = f by conjugate gradients (G symmetric positive
/// semi-definite, f in the range of G) and reports ||w||_1.  Stops when the
/// max-norm residual drops below tol * max|f|.
WitnessResult witness_l1(const EquilibriumKernel& g, const Vector& f, double tol = 1e-10,
                         int max_iter = 10000);

/// A priori error cap for the equal-weight estimate after n points:
/// 3 |||G||| ||w||_1 / (n + 1).
double bound_quadest(const EquilibriumKernel& g, double witness_l1_norm, Index n);

/// Header metadata stored with a saved sequence.
struct SequenceHeader {
    std::string kernel_hash;
    std::string start;
    Index n = 0;
};

/// Text format: `# lejaq.sequence.v1`, header comments (kernel hash, start
/// policy, n), then one vertex id per line.
void save_sequence(const LejaSequence& seq, const SequenceHeader& header, std::ostream& out);
void save_sequence_file(const LejaSequence& seq, const SequenceHeader& header,
                        const std::string& path);

struct LoadedSequence {
    SequenceHeader header;
    std::vector<Index> points;
};

LoadedSequence load_sequence(std::istream& in);
LoadedSequence load_sequence_file(const std::string& path);

/// Rebuilds potential and step minima by replaying stored points against a
/// kernel (validates ids; the replay is bitwise identical to the original
/// selection's bookkeeping).
LejaSequence replay_sequence(const EquilibriumKernel& g, const std::vector<Index>& points);

}  // namespace lejaq
