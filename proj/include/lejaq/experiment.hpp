#pragma once

#include "lejaq/generators.hpp"
#include "lejaq/kernel.hpp"
#include "lejaq/leja.hpp"
#include "lejaq/point_cloud.hpp"
#include "lejaq/scaling.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lejaq {

enum class GraphFamily { WattsStrogatz, TwoCluster, EdgeList };
/// Sinkhorn rescales the squared graph (see sinkhorn_kernel); the others act
/// on the graph as given.
enum class KernelMethod { DiagStrict, DiagGraph, Householder, Sinkhorn };
enum class MeasurePolicy { InverseDensity, Uniform, File };

/// Vertex function used as quadrature integrand.
struct FunctionPolicy {
    enum class Kind { Coordinate, Fiedler, Indicator, File };
    Kind kind = Kind::Fiedler;
    int axis = 0;      ///< Coordinate
    int label = 0;     ///< Indicator
    std::string path;  ///< File (one real per vertex per line)
};

struct ExperimentConfig {
    GraphFamily family = GraphFamily::WattsStrogatz;
    Index n_vertices = 500;
    int trials = 50;
    std::uint64_t seed = 1;
    int jobs = 1;

    KernelMethod method = KernelMethod::Sinkhorn;
    double alpha = 0.05;
    double sinkhorn_tol = 1e-10;
    double verify_tol = 1e-8;

    MeasurePolicy measure = MeasurePolicy::InverseDensity;
    std::string measure_path;

    FunctionPolicy function;
    std::string labels_path;

    StartPolicy start;          ///< Random start reseeds per trial
    std::vector<Index> n_grid = {1, 2, 5, 10, 20, 50, 100, 200};

    // Watts-Strogatz family
    Index mean_degree = 10;
    double beta = 0.25;

    // Two-cluster family
    double heavy_fraction = 0.9;
    double center1_x = 0.0, center1_y = 0.0;
    double center2_x = 1.0, center2_y = 0.0;
    double spread = 0.1;
    Index knn_k = 50;
    bool log_weight = false;  ///< log-potential edge weights instead of Gaussian
    double sigma = 0.1;
    double epsilon = 1e-3;

    // Edge-list family
    std::string input_path;
    bool restrict_lcc = false;
    bool square_input = false;

    /// Space-separated sorted key=value rendering of every field; two runs
    /// with equal canonical strings are byte-identical.
    std::string canonical() const;
    std::uint64_t fingerprint() const;

    /// Rejects combinations the families cannot honor (e.g. coordinate
    /// functions without a point cloud).
    void validate() const;
};

struct ErrorSeries {
    std::string estimator;
    std::vector<double> mean_abs_error;  ///< per grid position; NaN when count = 0
    std::vector<double> std_abs_error;   ///< unbiased; 0 when count < 2
    std::vector<int> count;
};

struct ErrorCurve {
    std::vector<Index> n_grid;
    std::vector<ErrorSeries> series;
    int trials = 0;
    int excluded_trials = 0;
    std::vector<int> excluded_indices;
    std::string config_echo;
    std::uint64_t fingerprint = 0;
};

/// Runs cfg.trials independent trials (optionally across cfg.jobs threads;
/// results are folded in trial order, so parallel runs are byte-identical to
/// serial ones), measuring |estimate - integral| for the equal-weight and
/// triangular-weight greedy estimators and a Monte Carlo baseline on the
/// same grid.  Trials whose kernel fails equilibrium verification are
/// counted and excluded; construction errors abort with the trial index.
ErrorCurve run_error_experiment(const ExperimentConfig& cfg);

/// f(x) = coordinate `axis` of the point.
Vector coordinate_function(const PointCloud& cloud, int axis);

/// f(x) = 1 when labels[x] == label, else 0.
Vector indicator_function(const std::vector<int>& labels, int label);

/// Unit eigenvector for the second-smallest Laplacian eigenvalue, by
/// power iteration on s I - L with the constant vector deflated out.
/// Deterministic start; the sign is fixed so the first nonzero entry is
/// positive.
Vector fiedler_vector(const SparseSymMatrix& graph, double tol = 1e-8, int max_iter = 100000);

struct BoundRow {
    std::string check;
    Index n = 0;
    double measured = 0.0;
    double bound = 0.0;
    bool lower = false;  ///< true: pass means measured >= bound
    bool pass = false;
};

struct BoundLedger {
    std::vector<BoundRow> rows;
    double norm_g = 0.0;     ///< max absolute row sum of G
    double diag_max = 0.0;   ///< max diagonal entry of G
    double gamma = 0.0;      ///< v . (G v)
    std::string config_echo;
    std::uint64_t fingerprint = 0;
    bool all_passed = true;
};

/// Evaluates the a priori inequalities obeyed by a greedy sequence on a
/// kernel with equilibrium measure v, at each n in the grid:
///   quadrature      |equal-weight estimate - integral| <= 3 |||G||| ||w||_1 / (n+1)
///   energy          G(sigma_n - v, sigma_n - v)        <= (max diag - gamma) / n
///   potential_tri   max-norm triangular discrepancy    <= 2 |||G||| / n
///   potential_eq    max-norm equal-weight discrepancy  <= 3 |||G||| / (n+1)
///   stepsum_upper   weighted step-minimum average      <= gamma
///   stepsum_lower   same quantity                      >= n/(n-1) gamma - diag_max/(n-1)
/// The quadrature rows need f (pass an empty vector to skip them); the
/// n = 1 quadrature row is emitted only for entrywise non-negative kernels,
/// where the cap applies.  Rows other than quadrature and energy need n >= 2.
/// Slack 1e-9 * max(1, |||G|||) absorbs roundoff on both sides.
BoundLedger verify_bounds(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                          const Vector& f, const std::vector<Index>& n_grid);

struct LayoutStats {
    double covering_radius = 0.0;        ///< max over the cloud of distance to the nearest pick
    double min_pairwise_distance = 0.0;  ///< between distinct picks
    Index distinct_points = 0;
};

/// Geometry of the first n distinct selected points against the cloud they
/// were drawn from.  Needs at least two distinct points.
LayoutStats layout_statistics(const LejaSequence& seq, const PointCloud& cloud, Index n);

void write_error_curve_csv(const ErrorCurve& curve, std::ostream& out);
void write_error_curve_json(const ErrorCurve& curve, std::ostream& out);
void write_bound_ledger_csv(const BoundLedger& ledger, std::ostream& out);
void write_bound_ledger_json(const BoundLedger& ledger, std::ostream& out);

std::string to_string(GraphFamily f);
std::string to_string(KernelMethod m);
std::string to_string(MeasurePolicy p);
std::string to_string(const FunctionPolicy& f);

GraphFamily parse_graph_family(const std::string& text);
KernelMethod parse_kernel_method(const std::string& text);

/// "coordinate:<axis>", "fiedler", "indicator:<label>" or "file:<path>".
FunctionPolicy parse_function_policy(const std::string& text);

/// 16 lowercase hex digits.
std::string format_fingerprint(std::uint64_t fp);

}  // namespace lejaq
