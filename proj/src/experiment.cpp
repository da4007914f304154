#include "lejaq/experiment.hpp"

#include "lejaq/graph_io.hpp"
#include "lejaq/kernel_io.hpp"
#include "lejaq/rng.hpp"
#include "lejaq/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <thread>

namespace lejaq {

// ---------------------------------------------------------------------------
// Names and parsing

std::string to_string(GraphFamily f) {
    switch (f) {
        case GraphFamily::WattsStrogatz: return "ws";
        case GraphFamily::TwoCluster: return "two_cluster";
        case GraphFamily::EdgeList: return "edge_list";
    }
    return "?";
}

std::string to_string(KernelMethod m) {
    switch (m) {
        case KernelMethod::DiagStrict: return "diag_strict";
        case KernelMethod::DiagGraph: return "diag_graph";
        case KernelMethod::Householder: return "householder";
        case KernelMethod::Sinkhorn: return "sinkhorn";
    }
    return "?";
}

std::string to_string(MeasurePolicy p) {
    switch (p) {
        case MeasurePolicy::InverseDensity: return "inverse_density";
        case MeasurePolicy::Uniform: return "uniform";
        case MeasurePolicy::File: return "file";
    }
    return "?";
}

std::string to_string(const FunctionPolicy& f) {
    switch (f.kind) {
        case FunctionPolicy::Kind::Coordinate: return "coordinate:" + std::to_string(f.axis);
        case FunctionPolicy::Kind::Fiedler: return "fiedler";
        case FunctionPolicy::Kind::Indicator: return "indicator:" + std::to_string(f.label);
        case FunctionPolicy::Kind::File: return "file:" + f.path;
    }
    return "?";
}

GraphFamily parse_graph_family(const std::string& text) {
    if (text == "ws") return GraphFamily::WattsStrogatz;
    if (text == "two_cluster") return GraphFamily::TwoCluster;
    if (text == "edge_list") return GraphFamily::EdgeList;
    throw std::invalid_argument("graph family must be 'ws', 'two_cluster' or 'edge_list', got '" +
                                text + "'");
}

KernelMethod parse_kernel_method(const std::string& text) {
    if (text == "diag_strict") return KernelMethod::DiagStrict;
    if (text == "diag_graph") return KernelMethod::DiagGraph;
    if (text == "householder") return KernelMethod::Householder;
    if (text == "sinkhorn") return KernelMethod::Sinkhorn;
    throw std::invalid_argument(
        "method must be 'diag_strict', 'diag_graph', 'householder' or 'sinkhorn', got '" + text +
        "'");
}

FunctionPolicy parse_function_policy(const std::string& text) {
    FunctionPolicy f;
    if (text == "fiedler") {
        f.kind = FunctionPolicy::Kind::Fiedler;
        return f;
    }
    auto integer_arg = [](const std::string& arg) {
        size_t pos = 0;
        const int v = std::stoi(arg, &pos);
        if (pos != arg.size()) throw std::invalid_argument("trailing characters");
        return v;
    };
    try {
        if (text.rfind("coordinate:", 0) == 0) {
            f.kind = FunctionPolicy::Kind::Coordinate;
            f.axis = integer_arg(text.substr(11));
            return f;
        }
        if (text.rfind("indicator:", 0) == 0) {
            f.kind = FunctionPolicy::Kind::Indicator;
            f.label = integer_arg(text.substr(10));
            return f;
        }
    } catch (const std::exception&) {
        // fall through to the shared error
    }
    if (text.rfind("file:", 0) == 0 && text.size() > 5) {
        f.kind = FunctionPolicy::Kind::File;
        f.path = text.substr(5);
        return f;
    }
    throw std::invalid_argument(
        "function must be 'coordinate:<axis>', 'fiedler', 'indicator:<label>' or 'file:<path>', "
        "got '" +
        text + "'");
}

std::string format_fingerprint(std::uint64_t fp) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, fp);
    return buf;
}

// ---------------------------------------------------------------------------
// Config

std::string ExperimentConfig::canonical() const {
    // jobs is deliberately omitted: the thread count may not influence results.
    std::vector<std::pair<std::string, std::string>> kv = {
        {"family", to_string(family)},
        {"n_vertices", std::to_string(n_vertices)},
        {"trials", std::to_string(trials)},
        {"seed", std::to_string(seed)},
        {"method", to_string(method)},
        {"alpha", format_real(alpha)},
        {"sinkhorn_tol", format_real(sinkhorn_tol)},
        {"verify_tol", format_real(verify_tol)},
        {"measure", to_string(measure)},
        {"function", to_string(function)},
        {"start", start.describe()},
    };
    {
        std::string grid;
        for (size_t i = 0; i < n_grid.size(); ++i) {
            if (i) grid += ",";
            grid += std::to_string(n_grid[i]);
        }
        kv.emplace_back("n_grid", grid);
    }
    if (measure == MeasurePolicy::File) kv.emplace_back("measure_file", measure_path);
    if (function.kind == FunctionPolicy::Kind::Indicator && !labels_path.empty())
        kv.emplace_back("labels", labels_path);
    switch (family) {
        case GraphFamily::WattsStrogatz:
            kv.emplace_back("mean_degree", std::to_string(mean_degree));
            kv.emplace_back("beta", format_real(beta));
            break;
        case GraphFamily::TwoCluster:
            kv.emplace_back("heavy_fraction", format_real(heavy_fraction));
            kv.emplace_back("center1", format_real(center1_x) + "," + format_real(center1_y));
            kv.emplace_back("center2", format_real(center2_x) + "," + format_real(center2_y));
            kv.emplace_back("spread", format_real(spread));
            kv.emplace_back("knn_k", std::to_string(knn_k));
            kv.emplace_back("weight", log_weight ? "log:" + format_real(epsilon)
                                                 : "gaussian:" + format_real(sigma));
            break;
        case GraphFamily::EdgeList:
            kv.emplace_back("input", input_path);
            kv.emplace_back("lcc", restrict_lcc ? "1" : "0");
            kv.emplace_back("square", square_input ? "1" : "0");
            break;
    }
    std::sort(kv.begin(), kv.end());
    std::string out;
    for (size_t i = 0; i < kv.size(); ++i) {
        if (i) out += " ";
        out += kv[i].first + "=" + kv[i].second;
    }
    return out;
}

std::uint64_t ExperimentConfig::fingerprint() const { return fnv1a64(canonical()); }

void ExperimentConfig::validate() const {
    if (n_vertices < 3) throw std::invalid_argument("experiment: n_vertices must be at least 3");
    if (trials < 1) throw std::invalid_argument("experiment: trials must be positive");
    if (jobs < 1) throw std::invalid_argument("experiment: jobs must be positive");
    if (n_grid.empty()) throw std::invalid_argument("experiment: n grid is empty");
    for (Index n : n_grid)
        if (n < 1) throw std::invalid_argument("experiment: grid entries must be positive");
    if (family == GraphFamily::EdgeList && input_path.empty())
        throw std::invalid_argument("experiment: edge_list family needs an input path");
    if (family != GraphFamily::EdgeList && (restrict_lcc || square_input))
        throw std::invalid_argument("experiment: lcc/square apply to edge_list inputs only");
    if (measure == MeasurePolicy::File && measure_path.empty())
        throw std::invalid_argument("experiment: measure policy 'file' needs a path");
    switch (function.kind) {
        case FunctionPolicy::Kind::Coordinate:
            if (family != GraphFamily::TwoCluster)
                throw std::invalid_argument(
                    "experiment: coordinate functions need a point-cloud family");
            if (function.axis < 0 || function.axis > 1)
                throw std::invalid_argument("experiment: coordinate axis must be 0 or 1");
            break;
        case FunctionPolicy::Kind::Indicator:
            if (family == GraphFamily::EdgeList && labels_path.empty())
                throw std::invalid_argument("experiment: indicator functions need labels");
            if (family == GraphFamily::WattsStrogatz)
                throw std::invalid_argument(
                    "experiment: the ws family has no labels; use 'fiedler' or 'file:<path>'");
            break;
        case FunctionPolicy::Kind::File:
            if (function.path.empty())
                throw std::invalid_argument("experiment: function file path is empty");
            break;
        case FunctionPolicy::Kind::Fiedler:
            break;
    }
    if (family == GraphFamily::TwoCluster) {
        if (knn_k < 1 || knn_k >= n_vertices)
            throw std::invalid_argument("experiment: knn_k must lie in [1, n_vertices - 1]");
    }
    if (family == GraphFamily::WattsStrogatz) {
        if (mean_degree < 2 || mean_degree % 2 != 0 || mean_degree >= n_vertices)
            throw std::invalid_argument("experiment: mean_degree must be even and < n_vertices");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("experiment: beta must lie in [0, 1]");
    }
}

// ---------------------------------------------------------------------------
// Test functions

Vector coordinate_function(const PointCloud& cloud, int axis) {
    if (axis < 0 || axis >= cloud.dim())
        throw std::invalid_argument("coordinate_function: axis out of range");
    return cloud.coords.col(axis);
}

Vector indicator_function(const std::vector<int>& labels, int label) {
    if (labels.empty()) throw std::invalid_argument("indicator_function: no labels");
    Vector f = Vector::Zero(static_cast<Index>(labels.size()));
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) f[static_cast<Index>(i)] = 1.0;
    return f;
}

Vector fiedler_vector(const SparseSymMatrix& graph, double tol, int max_iter) {
    const Index n = graph.size();
    if (n < 2) throw std::invalid_argument("fiedler_vector: need at least two vertices");
    if (!(tol > 0.0)) throw std::invalid_argument("fiedler_vector: tol must be positive");
    const SparseSymMatrix lap = graph_laplacian(graph);
    const double s = std::max(norms(lap).row_sum, 1.0);
    const Vector ones = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));

    Rng rng(0xf1ed1e5ULL);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = rng.uniform(-1.0, 1.0);
    x -= ones.dot(x) * ones;
    const double xnorm = x.norm();
    if (!(xnorm > 0.0)) throw NumericalError("fiedler_vector: degenerate start");
    x /= xnorm;

    // Power iteration on s I - L restricted to the complement of the constant
    // vector; the dominant direction there is the sought eigenvector.
    for (int iter = 0; iter < max_iter; ++iter) {
        Vector y = s * x - lap.matvec(x);
        y -= ones.dot(y) * ones;
        const double rho = x.dot(y);
        if ((y - rho * x).norm() <= tol * s) {
            Index lead = 0;
            while (lead < n && std::abs(x[lead]) <= 1e-8) ++lead;
            if (lead < n && x[lead] < 0.0) x = -x;
            return x;
        }
        const double ynorm = y.norm();
        if (!(ynorm > 0.0))
            throw NumericalError("fiedler_vector: iteration collapsed onto the constant vector");
        x = y / ynorm;
    }
    throw NumericalError("fiedler_vector: no convergence after " + std::to_string(max_iter) +
                         " iterations");
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

struct TrialOutcome {
    enum class Status { Ok, Excluded, Failed };
    Status status = Status::Ok;
    Matrix errors;           // series x grid
    double deviation = 0.0;  // Excluded: measured equilibrium deviation
    std::string message;     // Failed
    bool numerical = false;  // Failed: rethrow as NumericalError
};

constexpr int kSeriesCount = 3;
const char* const kSeriesNames[kSeriesCount] = {"leja_equal", "leja_weighted", "monte_carlo"};

/// Inputs loaded once and shared across trials (immutable afterwards, so
/// worker threads may read them concurrently).
struct FixedInputs {
    SparseSymMatrix graph;  // edge_list family
    std::optional<Measure> measure;
    Vector function_values;
    std::vector<int> labels;
    std::optional<EquilibriumKernel> kernel;  // edge_list family
};

EquilibriumKernel build_kernel(const ExperimentConfig& cfg, const SparseSymMatrix& graph,
                               const Measure& v) {
    switch (cfg.method) {
        case KernelMethod::DiagStrict:
            return diag_modified_kernel(graph, v, DiagMode::Strict);
        case KernelMethod::DiagGraph:
            return diag_modified_kernel(graph, v, DiagMode::GraphPreserving);
        case KernelMethod::Householder:
            // The construction needs a singular symmetric matrix; the graph
            // Laplacian is the canonical one.
            return householder_kernel(graph_laplacian(graph), v);
        case KernelMethod::Sinkhorn:
            // Rescaling the squared graph keeps the kernel's spectrum
            // non-negative (a precondition of the greedy selection); the raw
            // graph's kernel can trap the greedy on one low-diagonal vertex.
            return sinkhorn_kernel(graph, v, cfg.alpha, cfg.sinkhorn_tol);
    }
    throw std::invalid_argument("experiment: unknown kernel method");
}

Measure pick_measure(const ExperimentConfig& cfg, const SparseSymMatrix& graph,
                     const FixedInputs& fixed) {
    switch (cfg.measure) {
        case MeasurePolicy::InverseDensity: return inverse_density_measure(graph);
        case MeasurePolicy::Uniform: return Measure::uniform(graph.size());
        case MeasurePolicy::File:
            if (fixed.measure->size() != graph.size())
                throw std::invalid_argument("experiment: measure size does not match the graph");
            return *fixed.measure;
    }
    throw std::invalid_argument("experiment: unknown measure policy");
}

TrialOutcome run_trial(const ExperimentConfig& cfg, int trial, const FixedInputs& fixed) {
    TrialOutcome out;
    const std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const Index max_n = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());

    SparseSymMatrix graph;
    PointCloud cloud;
    std::vector<int> labels;
    switch (cfg.family) {
        case GraphFamily::WattsStrogatz:
            graph = watts_strogatz(cfg.n_vertices, cfg.mean_degree, cfg.beta, trial_seed);
            break;
        case GraphFamily::TwoCluster: {
            cloud = two_cluster_cloud(cfg.n_vertices, cfg.heavy_fraction,
                                      {cfg.center1_x, cfg.center1_y},
                                      {cfg.center2_x, cfg.center2_y}, cfg.spread, trial_seed);
            const EdgeWeightKind weight =
                cfg.log_weight ? EdgeWeightKind(LogPotentialWeight{cfg.epsilon})
                               : EdgeWeightKind(GaussianWeight{cfg.sigma});
            graph = knn_graph(cloud, cfg.knn_k, weight);
            const Index heavy = static_cast<Index>(
                std::llround(cfg.heavy_fraction * static_cast<double>(cfg.n_vertices)));
            labels.assign(static_cast<size_t>(cfg.n_vertices), 1);
            for (Index i = 0; i < heavy; ++i) labels[static_cast<size_t>(i)] = 0;
            break;
        }
        case GraphFamily::EdgeList:
            graph = fixed.graph;
            labels = fixed.labels;
            break;
    }

    const Measure v = pick_measure(cfg, graph, fixed);

    const Vector f = [&]() -> Vector {
        switch (cfg.function.kind) {
            case FunctionPolicy::Kind::Coordinate:
                return coordinate_function(cloud, cfg.function.axis);
            case FunctionPolicy::Kind::Fiedler:
                return fiedler_vector(graph);
            case FunctionPolicy::Kind::Indicator:
                return indicator_function(labels, cfg.function.label);
            case FunctionPolicy::Kind::File:
                if (fixed.function_values.size() != graph.size())
                    throw std::invalid_argument(
                        "experiment: function file size does not match the graph");
                return fixed.function_values;
        }
        throw std::invalid_argument("experiment: unknown function policy");
    }();

    std::optional<EquilibriumKernel> owned;
    if (cfg.family != GraphFamily::EdgeList) owned.emplace(build_kernel(cfg, graph, v));
    const EquilibriumKernel& kernel = owned ? *owned : *fixed.kernel;

    const EquilibriumReport rep = verify_equilibrium(kernel, v, cfg.verify_tol);
    if (!rep.passed) {
        out.status = TrialOutcome::Status::Excluded;
        out.deviation = rep.max_deviation;
        return out;
    }

    StartPolicy start = cfg.start;
    if (start.kind == StartPolicy::Kind::Random) start.seed = derive_seed(trial_seed, 1);
    const LejaSequence seq = leja_sequence(kernel, max_n, start);

    const double truth = f.dot(v.values());
    const std::uint64_t mc_seed = derive_seed(trial_seed, 2);
    out.errors = Matrix::Constant(kSeriesCount, static_cast<Index>(cfg.n_grid.size()),
                                  std::numeric_limits<double>::quiet_NaN());
    for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
        const Index n = cfg.n_grid[gi];
        out.errors(0, static_cast<Index>(gi)) = std::abs(equal_weight_estimate(f, seq, n) - truth);
        if (n >= 2)
            out.errors(1, static_cast<Index>(gi)) =
                std::abs(summability_estimate(f, seq, n) - truth);
        out.errors(2, static_cast<Index>(gi)) =
            std::abs(monte_carlo_estimate(f, v, n, mc_seed) - truth);
    }
    return out;
}

}  // namespace

ErrorCurve run_error_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    FixedInputs fixed;
    if (cfg.measure == MeasurePolicy::File) fixed.measure = load_measure_file(cfg.measure_path);
    if (cfg.function.kind == FunctionPolicy::Kind::File)
        fixed.function_values = load_vector_file(cfg.function.path);
    if (!cfg.labels_path.empty()) fixed.labels = load_labels_file(cfg.labels_path);
    if (cfg.family == GraphFamily::EdgeList) {
        fixed.graph = load_edge_list_file(cfg.input_path);
        if (cfg.restrict_lcc) fixed.graph = largest_connected_component(fixed.graph).graph;
        if (cfg.square_input) fixed.graph = square(fixed.graph);
        const Measure v = pick_measure(cfg, fixed.graph, fixed);
        fixed.kernel = build_kernel(cfg, fixed.graph, v);
    }

    std::vector<TrialOutcome> outcomes(static_cast<size_t>(cfg.trials));
    std::atomic<int> next{0};
    auto worker = [&] {
        while (true) {
            const int t = next.fetch_add(1);
            if (t >= cfg.trials) break;
            TrialOutcome& slot = outcomes[static_cast<size_t>(t)];
            try {
                slot = run_trial(cfg, t, fixed);
            } catch (const NumericalError& e) {
                slot.status = TrialOutcome::Status::Failed;
                slot.message = e.what();
                slot.numerical = true;
            } catch (const std::exception& e) {
                slot.status = TrialOutcome::Status::Failed;
                slot.message = e.what();
                slot.numerical = false;
            }
        }
    };
    if (cfg.jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int threads = std::min(cfg.jobs, cfg.trials);
        pool.reserve(static_cast<size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ErrorCurve curve;
    curve.n_grid = cfg.n_grid;
    curve.trials = cfg.trials;
    curve.config_echo = cfg.canonical();
    curve.fingerprint = cfg.fingerprint();
    const size_t gcount = cfg.n_grid.size();
    std::vector<std::vector<std::vector<double>>> cells(
        kSeriesCount, std::vector<std::vector<double>>(gcount));

    for (int t = 0; t < cfg.trials; ++t) {
        const TrialOutcome& o = outcomes[static_cast<size_t>(t)];
        switch (o.status) {
            case TrialOutcome::Status::Failed: {
                const std::string msg = "trial " + std::to_string(t) + ": " + o.message;
                if (o.numerical) throw NumericalError(msg);
                throw std::invalid_argument(msg);
            }
            case TrialOutcome::Status::Excluded:
                ++curve.excluded_trials;
                curve.excluded_indices.push_back(t);
                break;
            case TrialOutcome::Status::Ok:
                for (int s = 0; s < kSeriesCount; ++s)
                    for (size_t gi = 0; gi < gcount; ++gi) {
                        const double e = o.errors(s, static_cast<Index>(gi));
                        if (!std::isnan(e)) cells[static_cast<size_t>(s)][gi].push_back(e);
                    }
                break;
        }
    }

    for (int s = 0; s < kSeriesCount; ++s) {
        ErrorSeries series;
        series.estimator = kSeriesNames[s];
        for (size_t gi = 0; gi < gcount; ++gi) {
            const auto& vals = cells[static_cast<size_t>(s)][gi];
            const int m = static_cast<int>(vals.size());
            series.count.push_back(m);
            if (m == 0) {
                series.mean_abs_error.push_back(std::numeric_limits<double>::quiet_NaN());
                series.std_abs_error.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double sum = 0.0;
            for (double e : vals) sum += e;
            const double mean = sum / m;
            double ss = 0.0;
            for (double e : vals) ss += (e - mean) * (e - mean);
            series.mean_abs_error.push_back(mean);
            series.std_abs_error.push_back(m > 1 ? std::sqrt(ss / (m - 1)) : 0.0);
        }
        curve.series.push_back(std::move(series));
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Bound ledger

BoundLedger verify_bounds(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                          const Vector& f, const std::vector<Index>& n_grid) {
    if (g.size() != v.size()) throw std::invalid_argument("verify_bounds: dimension mismatch");
    if (n_grid.empty()) throw std::invalid_argument("verify_bounds: empty grid");
    std::vector<Index> grid = n_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() < 1)
        throw std::invalid_argument("verify_bounds: grid entries must be positive");
    const Index max_n = grid.back();
    if (max_n > seq.size())
        throw std::invalid_argument("verify_bounds: grid exceeds the sequence length");
    const bool with_f = f.size() != 0;
    if (with_f && f.size() != g.size())
        throw std::invalid_argument("verify_bounds: function size mismatch");

    BoundLedger ledger;
    const NormReport nr = g.norms();
    ledger.norm_g = nr.row_sum;
    ledger.diag_max = nr.diag_max;
    ledger.gamma = g.quadratic(v.values(), v.values());
    const double slack = 1e-9 * std::max(1.0, ledger.norm_g);

    double witness_norm = 0.0;
    double truth = 0.0;
    if (with_f) {
        witness_norm = witness_l1(g, f).l1;
        truth = f.dot(v.values());
    }

    const Vector target = g.matvec(v.values());
    Vector p = Vector::Zero(g.size());       // potential of the first k points
    Vector prefix = Vector::Zero(g.size());  // sum of the potentials of 1..k-1 points
    double stepsum = 0.0;                    // sum of step minima 1..k-1
    size_t gi = 0;

    auto push = [&](const char* check, Index n, double measured, double bound, bool lower) {
        const bool pass = lower ? measured >= bound - slack : measured <= bound + slack;
        ledger.rows.push_back({check, n, measured, bound, lower, pass});
        ledger.all_passed = ledger.all_passed && pass;
    };

    for (Index k = 1; k <= max_n; ++k) {
        g.add_column(seq.points[static_cast<size_t>(k - 1)], p);
        // Here p sums the columns of the first k points, prefix the potentials
        // of the first 1..k-1 points, stepsum the step minima 1..k-1.
        if (grid[gi] == k) {
            const Index n = k;
            const double dn = static_cast<double>(n);
            // The n = 1 cap needs entrywise non-negativity; from n = 2 on it
            // holds for any kernel with a constant potential.
            if (with_f && (n >= 2 || g.nonnegative()))
                push("quadrature", n, std::abs(equal_weight_estimate(f, seq, n) - truth),
                     bound_quadest(g, witness_norm, n), false);
            push("energy", n, energy_distance(g, v, seq, n), (ledger.diag_max - ledger.gamma) / dn,
                 false);
            if (n >= 2) {
                const double coeff = 2.0 / (dn * (dn - 1.0));
                push("potential_tri", n, (coeff * prefix - target).cwiseAbs().maxCoeff(),
                     2.0 * ledger.norm_g / dn, false);
                push("potential_eq", n, (p / dn - target).cwiseAbs().maxCoeff(),
                     3.0 * ledger.norm_g / (dn + 1.0), false);
                const double mid = coeff * stepsum;
                push("stepsum_upper", n, mid, ledger.gamma, false);
                push("stepsum_lower", n, mid,
                     dn / (dn - 1.0) * ledger.gamma - ledger.diag_max / (dn - 1.0), true);
            }
            ++gi;
            if (gi == grid.size()) break;
        }
        prefix += p;
        stepsum += seq.step_minima[static_cast<size_t>(k)];
    }
    return ledger;
}

// ---------------------------------------------------------------------------
// Layout

LayoutStats layout_statistics(const LejaSequence& seq, const PointCloud& cloud, Index n) {
    if (n < 1 || n > seq.size()) throw std::invalid_argument("layout_statistics: n out of range");
    std::vector<Index> distinct;
    std::vector<bool> seen(static_cast<size_t>(cloud.size()), false);
    for (const Index pt : seq.points) {
        if (pt < 0 || pt >= cloud.size())
            throw std::invalid_argument("layout_statistics: point id outside the cloud");
        if (!seen[static_cast<size_t>(pt)]) {
            seen[static_cast<size_t>(pt)] = true;
            distinct.push_back(pt);
            if (static_cast<Index>(distinct.size()) == n) break;
        }
    }
    if (distinct.size() < 2)
        throw std::invalid_argument("layout_statistics: fewer than two distinct points selected");

    LayoutStats stats;
    stats.distinct_points = static_cast<Index>(distinct.size());
    stats.covering_radius = 0.0;
    for (Index x = 0; x < cloud.size(); ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (const Index pt : distinct)
            best = std::min(best, (cloud.coords.row(x) - cloud.coords.row(pt)).norm());
        stats.covering_radius = std::max(stats.covering_radius, best);
    }
    stats.min_pairwise_distance = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < distinct.size(); ++i)
        for (size_t j = i + 1; j < distinct.size(); ++j)
            stats.min_pairwise_distance =
                std::min(stats.min_pairwise_distance,
                         (cloud.coords.row(distinct[i]) - cloud.coords.row(distinct[j])).norm());
    return stats;
}

// ---------------------------------------------------------------------------
// Writers

namespace {

void write_preamble(std::ostream& out, const char* kind, const std::string& echo,
                    std::uint64_t fp) {
    out << "# lejaq " << kVersion << " " << kind << "\n";
    out << "# fingerprint " << format_fingerprint(fp) << "\n";
    out << "# config " << echo << "\n";
}

}  // namespace

void write_error_curve_csv(const ErrorCurve& curve, std::ostream& out) {
    write_preamble(out, "error-curve", curve.config_echo, curve.fingerprint);
    out << "# trials " << curve.trials << " excluded " << curve.excluded_trials << "\n";
    if (!curve.excluded_indices.empty()) {
        out << "# excluded_indices";
        for (int t : curve.excluded_indices) out << " " << t;
        out << "\n";
    }
    out << "n,estimator,mean_abs_error,std_abs_error,trials\n";
    for (size_t gi = 0; gi < curve.n_grid.size(); ++gi) {
        for (const ErrorSeries& s : curve.series) {
            if (s.count[gi] == 0) continue;
            out << curve.n_grid[gi] << "," << s.estimator << ","
                << format_real(s.mean_abs_error[gi]) << "," << format_real(s.std_abs_error[gi])
                << "," << s.count[gi] << "\n";
        }
    }
    if (!out) throw std::runtime_error("write_error_curve_csv: write failed");
}

void write_error_curve_json(const ErrorCurve& curve, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["tool"] = "lejaq";
    doc["version"] = kVersion;
    doc["kind"] = "error-curve";
    doc["fingerprint"] = format_fingerprint(curve.fingerprint);
    doc["config"] = curve.config_echo;
    doc["trials"] = curve.trials;
    doc["excluded_trials"] = curve.excluded_trials;
    doc["excluded_indices"] = curve.excluded_indices;
    doc["n_grid"] = curve.n_grid;
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const ErrorSeries& s : curve.series) {
        nlohmann::ordered_json entry;
        entry["estimator"] = s.estimator;
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (size_t gi = 0; gi < curve.n_grid.size(); ++gi) {
            if (s.count[gi] == 0) continue;
            nlohmann::ordered_json pt;
            pt["n"] = curve.n_grid[gi];
            pt["mean_abs_error"] = s.mean_abs_error[gi];
            pt["std_abs_error"] = s.std_abs_error[gi];
            pt["count"] = s.count[gi];
            points.push_back(std::move(pt));
        }
        entry["points"] = std::move(points);
        series.push_back(std::move(entry));
    }
    doc["series"] = std::move(series);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write_error_curve_json: write failed");
}

void write_bound_ledger_csv(const BoundLedger& ledger, std::ostream& out) {
    write_preamble(out, "bound-ledger", ledger.config_echo, ledger.fingerprint);
    out << "# norm_g " << format_real(ledger.norm_g) << " diag_max "
        << format_real(ledger.diag_max) << " gamma " << format_real(ledger.gamma) << "\n";
    out << "check,n,measured,bound,direction,pass\n";
    for (const BoundRow& r : ledger.rows)
        out << r.check << "," << r.n << "," << format_real(r.measured) << ","
            << format_real(r.bound) << "," << (r.lower ? "lower" : "upper") << ","
            << (r.pass ? 1 : 0) << "\n";
    if (!out) throw std::runtime_error("write_bound_ledger_csv: write failed");
}

void write_bound_ledger_json(const BoundLedger& ledger, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["tool"] = "lejaq";
    doc["version"] = kVersion;
    doc["kind"] = "bound-ledger";
    doc["fingerprint"] = format_fingerprint(ledger.fingerprint);
    doc["config"] = ledger.config_echo;
    doc["norm_g"] = ledger.norm_g;
    doc["diag_max"] = ledger.diag_max;
    doc["gamma"] = ledger.gamma;
    doc["all_passed"] = ledger.all_passed;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const BoundRow& r : ledger.rows) {
        nlohmann::ordered_json row;
        row["check"] = r.check;
        row["n"] = r.n;
        row["measured"] = r.measured;
        row["bound"] = r.bound;
        row["direction"] = r.lower ? "lower" : "upper";
        row["pass"] = r.pass;
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write_bound_ledger_json: write failed");
}

}  // namespace lejaq
