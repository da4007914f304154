#include "lejaq/experiment.hpp"
#include "lejaq/graph_io.hpp"
#include "lejaq/kernel_io.hpp"
#include "lejaq/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace lejaq;

// ---------------------------------------------------------------------------
// Shared pieces

/// Graph sources accepted by the kernel-building subcommands.
struct GraphOptions {
    std::string input;
    std::string cloud;
    Index knn_k = 10;
    std::string weight = "gaussian:0.1";
    bool lcc = false;
    bool square_graph = false;
};

void add_graph_options(CLI::App* cmd, GraphOptions& o) {
    auto* in = cmd->add_option("--input", o.input,
                               "Edge list file: 'u v [weight]' per line, 0-based ids");
    auto* cl =
        cmd->add_option("--cloud", o.cloud, "Point cloud CSV; builds a k-nearest-neighbor graph");
    in->excludes(cl);
    cl->excludes(in);
    cmd->add_option("--knn-k", o.knn_k, "Neighbors per point for --cloud")->capture_default_str();
    cmd->add_option("--weight", o.weight,
                    "Edge weights for --cloud: gaussian:<sigma> or log:<epsilon>")
        ->capture_default_str();
    cmd->add_flag("--lcc", o.lcc, "Restrict to the largest connected component");
    cmd->add_flag("--square", o.square_graph,
                  "Replace the graph by its square (two-step connectivity)");
}

EdgeWeightKind parse_weight(const std::string& text) {
    try {
        if (text.rfind("gaussian:", 0) == 0) return GaussianWeight{std::stod(text.substr(9))};
        if (text.rfind("log:", 0) == 0) return LogPotentialWeight{std::stod(text.substr(4))};
    } catch (const std::exception&) {
        // fall through
    }
    throw std::invalid_argument("weight must be 'gaussian:<sigma>' or 'log:<epsilon>', got '" +
                                text + "'");
}

SparseSymMatrix build_graph(const GraphOptions& o) {
    SparseSymMatrix g;
    if (!o.input.empty()) {
        g = load_edge_list_file(o.input);
    } else if (!o.cloud.empty()) {
        const PointCloud cloud = load_cloud_csv_file(o.cloud);
        g = knn_graph(cloud, o.knn_k, parse_weight(o.weight));
    } else {
        throw std::invalid_argument("either --input or --cloud is required");
    }
    if (o.lcc) g = largest_connected_component(g).graph;
    if (o.square_graph) g = square(g);
    return g;
}

/// --measure accepts the policies 'inverse_density' and 'uniform' or a file
/// of positive per-vertex values ('file:<path>' or a bare path).
Measure resolve_measure(const std::string& spec, const SparseSymMatrix& graph) {
    if (spec == "inverse_density") return inverse_density_measure(graph);
    if (spec == "uniform") return Measure::uniform(graph.size());
    const std::string path = spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
    const Measure m = load_measure_file(path, &std::cerr);
    if (m.size() != graph.size())
        throw std::invalid_argument("measure file has " + std::to_string(m.size()) +
                                    " entries but the graph has " + std::to_string(graph.size()) +
                                    " vertices");
    return m;
}

/// Strips an optional 'file:' prefix from a path-valued function spec.
std::string function_file_path(const std::string& spec) {
    return spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
}

std::vector<Index> parse_grid(const std::string& text) {
    std::vector<Index> grid;
    std::string token;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (token.empty())
                throw std::invalid_argument("bad n grid '" + text + "': empty entry");
            try {
                size_t pos = 0;
                const long long v = std::stoll(token, &pos);
                if (pos != token.size() || v < 1) throw std::invalid_argument("");
                grid.push_back(static_cast<Index>(v));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad n grid entry '" + token + "'");
            }
            token.clear();
        } else {
            token += text[i];
        }
    }
    if (grid.empty()) throw std::invalid_argument("n grid is empty");
    return grid;
}

/// 1, 2, 5, 10, 20, 50, ... up to and including max_n.
std::vector<Index> default_grid(Index max_n) {
    std::vector<Index> grid;
    for (Index base = 1;; base *= 10) {
        for (const Index m : {Index{1}, Index{2}, Index{5}}) {
            const Index n = m * base;
            if (n > max_n) {
                if (grid.empty() || grid.back() != max_n) grid.push_back(max_n);
                return grid;
            }
            grid.push_back(n);
        }
    }
}

/// Writes through `fn` to the given file, or to stdout for "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    fn(out);
}

std::ostream& report() { return std::cout; }

// ---------------------------------------------------------------------------
// Subcommands

struct KernelArgs {
    GraphOptions graph;
    std::string measure = "inverse_density";
    std::string method = "sinkhorn";
    double alpha = 0.05;
    double tol = 1e-10;
    std::string out = "-";
};

int cmd_kernel(const KernelArgs& a) {
    const SparseSymMatrix graph = build_graph(a.graph);
    const Measure v = resolve_measure(a.measure, graph);
    const KernelMethod method = parse_kernel_method(a.method);

    EquilibriumKernel kernel = [&] {
        switch (method) {
            case KernelMethod::DiagStrict:
                return diag_modified_kernel(graph, v, DiagMode::Strict);
            case KernelMethod::DiagGraph:
                return diag_modified_kernel(graph, v, DiagMode::GraphPreserving);
            case KernelMethod::Householder:
                return householder_kernel(graph_laplacian(graph), v);
            case KernelMethod::Sinkhorn:
                // Scales the squared graph so the kernel's spectrum stays
                // non-negative, matching what the experiment command runs.
                return sinkhorn_kernel(graph, v, a.alpha, a.tol);
        }
        throw std::invalid_argument("unknown kernel method");
    }();

    with_output(a.out, [&](std::ostream& out) { save_kernel(kernel, out); });
    if (a.out != "-") {
        report() << "form " << (kernel.form() == KernelForm::Dense      ? "dense"
                                : kernel.form() == KernelForm::Sparse   ? "sparse"
                                                                        : "structured")
                 << "\n";
        report() << "n " << kernel.size() << "\n";
        report() << "method " << to_string(method) << "\n";
        report() << "capacity " << format_real(kernel.capacity()) << "\n";
        report() << "capacity_deviation " << format_real(kernel.capacity_deviation()) << "\n";
        report() << "nonnegative " << (kernel.nonnegative() ? 1 : 0) << "\n";
        report() << "hash " << kernel_hash(kernel) << "\n";
    }
    return 0;
}

struct LejaArgs {
    std::string kernel;
    Index n = 0;
    std::string start = "min_diag";
    std::string out = "-";
};

int cmd_leja(const LejaArgs& a) {
    const EquilibriumKernel kernel = load_kernel_file(a.kernel);
    const StartPolicy start = StartPolicy::parse(a.start);
    const LejaSequence seq = leja_sequence(kernel, a.n, start);
    const SequenceHeader header{kernel_hash(kernel), start.describe(), a.n};
    with_output(a.out, [&](std::ostream& out) { save_sequence(seq, header, out); });
    if (a.out != "-") {
        report() << "n " << seq.size() << "\n";
        report() << "start " << start.describe() << "\n";
        report() << "kernel " << header.kernel_hash << "\n";
        report() << "first_point " << seq.points.front() << "\n";
        report() << "final_step_minimum "
                 << format_real(seq.step_minima[static_cast<size_t>(seq.size() - 1)]) << "\n";
    }
    return 0;
}

struct EstimateArgs {
    std::string kernel;
    std::string sequence;
    std::string function;
    Index n = 0;  // 0: use the whole sequence
    bool bound = false;
    double tol = 1e-10;
};

int cmd_estimate(const EstimateArgs& a) {
    const EquilibriumKernel kernel = load_kernel_file(a.kernel);
    const LoadedSequence loaded = load_sequence_file(a.sequence);
    if (loaded.header.kernel_hash != kernel_hash(kernel))
        throw std::invalid_argument("sequence was computed for kernel " +
                                    loaded.header.kernel_hash + " but this kernel hashes to " +
                                    kernel_hash(kernel));
    const LejaSequence seq = replay_sequence(kernel, loaded.points);
    const Index n = a.n == 0 ? seq.size() : a.n;
    if (n < 1 || n > seq.size())
        throw std::invalid_argument("n must lie in [1, " + std::to_string(seq.size()) + "]");

    const Vector f = load_vector_file(function_file_path(a.function));
    if (f.size() != kernel.size())
        throw std::invalid_argument("function file has " + std::to_string(f.size()) +
                                    " entries but the kernel has " +
                                    std::to_string(kernel.size()) + " vertices");
    const double truth = f.dot(kernel.measure().values());
    const double equal = equal_weight_estimate(f, seq, n);
    report() << "n " << n << "\n";
    report() << "integral " << format_real(truth) << "\n";
    report() << "estimate_equal " << format_real(equal) << "\n";
    report() << "error_equal " << format_real(std::abs(equal - truth)) << "\n";
    if (n >= 2) {
        const double weighted = summability_estimate(f, seq, n);
        report() << "estimate_weighted " << format_real(weighted) << "\n";
        report() << "error_weighted " << format_real(std::abs(weighted - truth)) << "\n";
    }
    if (a.bound) {
        const WitnessResult w = witness_l1(kernel, f, a.tol);
        report() << "witness_l1 " << format_real(w.l1) << "\n";
        report() << "bound_equal " << format_real(bound_quadest(kernel, w.l1, n)) << "\n";
    }
    return 0;
}

struct VerifyArgs {
    std::string kernel;
    double tol = 1e-8;
    std::string sequence;
    std::string function;
    std::string grid;
    std::string format = "csv";
    std::string out = "-";
};

int cmd_verify(const VerifyArgs& a) {
    const EquilibriumKernel kernel = load_kernel_file(a.kernel);
    const Measure& v = kernel.measure();
    const EquilibriumReport rep = verify_equilibrium(kernel, v, a.tol);
    report() << "gamma " << format_real(rep.gamma_est) << "\n";
    report() << "capacity " << format_real(kernel.capacity()) << "\n";
    report() << "max_deviation " << format_real(rep.max_deviation) << "\n";
    report() << "passed " << (rep.passed ? 1 : 0) << "\n";
    if (!rep.passed) return 2;
    if (a.sequence.empty()) return 0;

    const LoadedSequence loaded = load_sequence_file(a.sequence);
    if (loaded.header.kernel_hash != kernel_hash(kernel))
        throw std::invalid_argument("sequence was computed for kernel " +
                                    loaded.header.kernel_hash + " but this kernel hashes to " +
                                    kernel_hash(kernel));
    const LejaSequence seq = replay_sequence(kernel, loaded.points);
    const std::vector<Index> grid =
        a.grid.empty() ? default_grid(seq.size()) : parse_grid(a.grid);
    Vector f;
    if (!a.function.empty()) {
        f = load_vector_file(function_file_path(a.function));
        if (f.size() != kernel.size())
            throw std::invalid_argument("function file has " + std::to_string(f.size()) +
                                        " entries but the kernel has " +
                                        std::to_string(kernel.size()) + " vertices");
    }
    BoundLedger ledger = verify_bounds(kernel, v, seq, f, grid);
    ledger.config_echo = "kernel=" + loaded.header.kernel_hash +
                         " start=" + loaded.header.start +
                         " sequence_n=" + std::to_string(seq.size());
    ledger.fingerprint = fnv1a64(ledger.config_echo);
    with_output(a.out, [&](std::ostream& out) {
        if (a.format == "json")
            write_bound_ledger_json(ledger, out);
        else
            write_bound_ledger_csv(ledger, out);
    });
    return ledger.all_passed ? 0 : 2;
}

struct ExperimentArgs {
    ExperimentConfig cfg;
    std::string family = "ws";
    std::string method = "sinkhorn";
    std::string measure = "inverse_density";
    std::string function;  // empty: family default
    std::string start = "min_diag";
    std::string grid;
    std::string weight;  // empty: gaussian with cfg.sigma
    std::string format = "csv";
    std::string out = "-";
};

int cmd_experiment(ExperimentArgs& a) {
    ExperimentConfig& cfg = a.cfg;
    cfg.family = parse_graph_family(a.family);
    cfg.method = parse_kernel_method(a.method);
    cfg.start = StartPolicy::parse(a.start);
    if (!a.grid.empty()) cfg.n_grid = parse_grid(a.grid);

    if (a.measure == "inverse_density") {
        cfg.measure = MeasurePolicy::InverseDensity;
    } else if (a.measure == "uniform") {
        cfg.measure = MeasurePolicy::Uniform;
    } else {
        cfg.measure = MeasurePolicy::File;
        cfg.measure_path =
            a.measure.rfind("file:", 0) == 0 ? a.measure.substr(5) : a.measure;
    }

    if (a.function.empty())
        a.function = cfg.family == GraphFamily::TwoCluster ? "coordinate:0" : "fiedler";
    cfg.function = parse_function_policy(a.function);

    if (!a.weight.empty()) {
        const EdgeWeightKind w = parse_weight(a.weight);
        if (const auto* gw = std::get_if<GaussianWeight>(&w)) {
            cfg.log_weight = false;
            cfg.sigma = gw->sigma;
        } else {
            cfg.log_weight = true;
            cfg.epsilon = std::get<LogPotentialWeight>(w).epsilon;
        }
    }

    const ErrorCurve curve = run_error_experiment(cfg);
    with_output(a.out, [&](std::ostream& out) {
        if (a.format == "json")
            write_error_curve_json(curve, out);
        else
            write_error_curve_csv(curve, out);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph kernels with a prescribed equilibrium measure and greedy "
                 "equal-weight quadrature"};
    app.set_config("--config", "", "Read options from a key=value file");
    app.set_version_flag("--version", std::string("lejaq ") + lejaq::kVersion);
    app.require_subcommand(1);

    auto check_format = CLI::IsMember({"csv", "json"});

    KernelArgs ka;
    auto* kernel_cmd =
        app.add_subcommand("kernel", "Build a kernel with a prescribed equilibrium measure");
    add_graph_options(kernel_cmd, ka.graph);
    kernel_cmd->add_option("--measure", ka.measure,
                           "'inverse_density', 'uniform' or a file of positive values")
        ->capture_default_str();
    kernel_cmd->add_option("--method", ka.method,
                           "diag_strict, diag_graph, householder or sinkhorn")
        ->capture_default_str();
    kernel_cmd->add_option("--alpha", ka.alpha, "Rank-one mixing weight (sinkhorn)")
        ->capture_default_str();
    kernel_cmd->add_option("--tol", ka.tol, "Scaling convergence tolerance (sinkhorn)")
        ->capture_default_str();
    kernel_cmd->add_option("--out", ka.out, "Kernel file ('-': stdout)")->capture_default_str();

    LejaArgs la;
    auto* leja_cmd = app.add_subcommand("leja", "Greedily select quadrature points on a kernel");
    leja_cmd->add_option("--kernel", la.kernel, "Kernel file from 'lejaq kernel'")->required();
    leja_cmd->add_option("--n", la.n, "Number of points")->required()->check(CLI::PositiveNumber);
    leja_cmd->add_option("--start", la.start, "min_diag, vertex:<id> or random:<seed>")
        ->capture_default_str();
    leja_cmd->add_option("--out", la.out, "Sequence file ('-': stdout)")->capture_default_str();

    EstimateArgs ea;
    auto* estimate_cmd =
        app.add_subcommand("estimate", "Integrate a vertex function with a selected sequence");
    estimate_cmd->add_option("--kernel", ea.kernel, "Kernel file")->required();
    estimate_cmd->add_option("--sequence", ea.sequence, "Sequence file from 'lejaq leja'")
        ->required();
    estimate_cmd->add_option("--function", ea.function, "File with one value per vertex")
        ->required();
    estimate_cmd->add_option("--n", ea.n, "Use only the first n points (default: all)");
    estimate_cmd->add_flag("--bound", ea.bound,
                           "Also report the a priori error bound (solves for a witness)");
    estimate_cmd->add_option("--tol", ea.tol, "Witness solve tolerance")->capture_default_str();

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand(
        "verify", "Check the equilibrium property and, optionally, the sequence bounds");
    verify_cmd->add_option("--kernel", va.kernel, "Kernel file")->required();
    verify_cmd->add_option("--tol", va.tol, "Allowed potential deviation")->capture_default_str();
    verify_cmd->add_option("--sequence", va.sequence, "Sequence file; enables the bound ledger");
    verify_cmd->add_option("--function", va.function,
                           "File with one value per vertex (adds quadrature rows)");
    verify_cmd->add_option("--n-grid", va.grid, "Comma-separated point counts (default: 1,2,5,...)");
    verify_cmd->add_option("--format", va.format, "Ledger format: csv or json")
        ->capture_default_str()
        ->check(check_format);
    verify_cmd->add_option("--out", va.out, "Ledger file ('-': stdout)")->capture_default_str();

    ExperimentArgs xa;
    auto* exp_cmd = app.add_subcommand(
        "experiment", "Measure quadrature error curves over randomized trials");
    exp_cmd->add_option("--family", xa.family, "ws, two_cluster or edge_list")
        ->capture_default_str();
    exp_cmd->add_option("--n-vertices", xa.cfg.n_vertices, "Vertices per trial graph")
        ->capture_default_str();
    exp_cmd->add_option("--trials", xa.cfg.trials, "Number of trials")->capture_default_str();
    exp_cmd->add_option("--seed", xa.cfg.seed, "Master seed")->capture_default_str();
    exp_cmd->add_option("--jobs", xa.cfg.jobs, "Worker threads (output is independent of this)")
        ->capture_default_str();
    exp_cmd->add_option("--method", xa.method, "diag_strict, diag_graph, householder or sinkhorn")
        ->capture_default_str();
    exp_cmd->add_option("--alpha", xa.cfg.alpha, "Rank-one mixing weight (sinkhorn)")
        ->capture_default_str();
    exp_cmd->add_option("--tol", xa.cfg.sinkhorn_tol, "Scaling convergence tolerance (sinkhorn)")
        ->capture_default_str();
    exp_cmd->add_option("--verify-tol", xa.cfg.verify_tol,
                        "Equilibrium deviation above which a trial is excluded")
        ->capture_default_str();
    exp_cmd->add_option("--measure", xa.measure,
                        "'inverse_density', 'uniform' or a file of positive values")
        ->capture_default_str();
    exp_cmd->add_option("--function", xa.function,
                        "coordinate:<axis>, fiedler, indicator:<label> or file:<path> "
                        "(default: per family)");
    exp_cmd->add_option("--labels", xa.cfg.labels_path, "Label file for indicator functions");
    exp_cmd->add_option("--start", xa.start, "min_diag, vertex:<id> or random:<seed>")
        ->capture_default_str();
    exp_cmd->add_option("--n-grid", xa.grid, "Comma-separated point counts");
    exp_cmd->add_option("--mean-degree", xa.cfg.mean_degree, "ws: even ring degree")
        ->capture_default_str();
    exp_cmd->add_option("--beta", xa.cfg.beta, "ws: rewiring probability")->capture_default_str();
    exp_cmd->add_option("--heavy-fraction", xa.cfg.heavy_fraction,
                        "two_cluster: share of points in the first cluster")
        ->capture_default_str();
    exp_cmd->add_option("--spread", xa.cfg.spread, "two_cluster: cluster standard deviation")
        ->capture_default_str();
    exp_cmd->add_option("--knn-k", xa.cfg.knn_k, "two_cluster: neighbors per point")
        ->capture_default_str();
    exp_cmd->add_option("--weight", xa.weight,
                        "two_cluster: gaussian:<sigma> or log:<epsilon>");
    exp_cmd->add_option("--input", xa.cfg.input_path, "edge_list: edge list file");
    exp_cmd->add_flag("--lcc", xa.cfg.restrict_lcc,
                      "edge_list: restrict to the largest connected component");
    exp_cmd->add_flag("--square", xa.cfg.square_input, "edge_list: square the adjacency matrix");
    exp_cmd->add_option("--format", xa.format, "Output format: csv or json")
        ->capture_default_str()
        ->check(check_format);
    exp_cmd->add_option("--out", xa.out, "Output file ('-': stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*kernel_cmd) return cmd_kernel(ka);
        if (*leja_cmd) return cmd_leja(la);
        if (*estimate_cmd) return cmd_estimate(ea);
        if (*verify_cmd) return cmd_verify(va);
        if (*exp_cmd) return cmd_experiment(xa);
    } catch (const lejaq::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
