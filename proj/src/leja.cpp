#include "lejaq/leja.hpp"

#include "lejaq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace lejaq {

std::string StartPolicy::describe() const {
    switch (kind) {
        case Kind::MinDiagonal: return "min_diag";
        case Kind::Explicit: return "vertex:" + std::to_string(vertex);
        case Kind::Random: return "random:" + std::to_string(seed);
    }
    return "?";
}

StartPolicy StartPolicy::parse(const std::string& text) {
    if (text == "min_diag") return min_diagonal();
    try {
        if (text.rfind("vertex:", 0) == 0) {
            size_t pos = 0;
            const std::string arg = text.substr(7);
            const long long id = std::stoll(arg, &pos);
            if (pos != arg.size() || id < 0) throw std::invalid_argument("");
            return at(static_cast<Index>(id));
        }
        if (text.rfind("random:", 0) == 0) {
            size_t pos = 0;
            const std::string arg = text.substr(7);
            const unsigned long long seed = std::stoull(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument("");
            return random(seed);
        }
    } catch (const std::exception&) {
        // fall through to the shared error
    }
    throw std::invalid_argument("start policy must be 'min_diag', 'vertex:<id>' or 'random:<seed>', got '" +
                                text + "'");
}

namespace {

Index argmin_scan(const Vector& vals, const std::vector<Index>* order) {
    if (!order) {
        Index best = 0;
        for (Index i = 1; i < vals.size(); ++i)
            if (vals[i] < vals[best]) best = i;
        return best;
    }
    Index best = (*order)[0];
    for (size_t k = 1; k < order->size(); ++k) {
        const Index i = (*order)[k];
        if (vals[i] < vals[best]) best = i;
    }
    return best;
}

void check_points(const std::vector<Index>& points, Index n_used, Index n_vertices,
                  const char* who) {
    if (n_used < 1 || n_used > static_cast<Index>(points.size()))
        throw std::invalid_argument(std::string(who) + ": n out of range");
    for (Index j = 0; j < n_used; ++j)
        if (points[static_cast<size_t>(j)] < 0 || points[static_cast<size_t>(j)] >= n_vertices)
            throw std::invalid_argument(std::string(who) + ": point id out of range");
}

}  // namespace

LejaSequence leja_sequence(const EquilibriumKernel& g, Index n, StartPolicy start,
                           const std::vector<Index>* scan_order) {
    const Index nv = g.size();
    if (n < 1) throw std::invalid_argument("leja_sequence: n must be positive");
    if (scan_order) {
        if (static_cast<Index>(scan_order->size()) != nv)
            throw std::invalid_argument("leja_sequence: scan order has wrong size");
        std::vector<bool> seen(static_cast<size_t>(nv), false);
        for (Index i : *scan_order) {
            if (i < 0 || i >= nv || seen[static_cast<size_t>(i)])
                throw std::invalid_argument("leja_sequence: scan order is not a permutation");
            seen[static_cast<size_t>(i)] = true;
        }
    }

    Index a0 = 0;
    switch (start.kind) {
        case StartPolicy::Kind::MinDiagonal: {
            const Vector diag = g.diagonal();
            a0 = argmin_scan(diag, scan_order);
            break;
        }
        case StartPolicy::Kind::Explicit:
            if (start.vertex < 0 || start.vertex >= nv)
                throw std::invalid_argument("leja_sequence: start vertex out of range");
            a0 = start.vertex;
            break;
        case StartPolicy::Kind::Random:
            a0 = Rng(start.seed).index(nv);
            break;
    }

    LejaSequence seq;
    seq.points.reserve(static_cast<size_t>(n));
    seq.step_minima.reserve(static_cast<size_t>(n));
    seq.points.push_back(a0);
    seq.step_minima.push_back(0.0);
    seq.potential = Vector::Zero(nv);
    for (Index k = 1; k < n; ++k) {
        g.add_column(seq.points.back(), seq.potential);
        const Index ak = argmin_scan(seq.potential, scan_order);
        seq.points.push_back(ak);
        seq.step_minima.push_back(seq.potential[ak]);
    }
    g.add_column(seq.points.back(), seq.potential);
    return seq;
}

LejaSequence replay_sequence(const EquilibriumKernel& g, const std::vector<Index>& points) {
    if (points.empty()) throw std::invalid_argument("replay_sequence: no points");
    check_points(points, static_cast<Index>(points.size()), g.size(), "replay_sequence");
    LejaSequence seq;
    seq.points = points;
    seq.step_minima.reserve(points.size());
    seq.step_minima.push_back(0.0);
    seq.potential = Vector::Zero(g.size());
    for (size_t k = 1; k < points.size(); ++k) {
        g.add_column(points[k - 1], seq.potential);
        seq.step_minima.push_back(seq.potential[points[k]]);
    }
    g.add_column(points.back(), seq.potential);
    return seq;
}

Vector empirical_vector(const LejaSequence& seq, Index n) {
    check_points(seq.points, n, seq.potential.size(), "empirical_vector");
    Vector sigma = Vector::Zero(seq.potential.size());
    for (Index j = 0; j < n; ++j) sigma[seq.points[static_cast<size_t>(j)]] += 1.0;
    sigma /= static_cast<double>(n);
    return sigma;
}

double equal_weight_estimate(const Vector& f, const LejaSequence& seq, Index n) {
    check_points(seq.points, n, f.size(), "equal_weight_estimate");
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) acc += f[seq.points[static_cast<size_t>(j)]];
    return acc / static_cast<double>(n);
}

double summability_estimate(const Vector& f, const LejaSequence& seq, Index n) {
    if (n < 2) throw std::invalid_argument("summability_estimate: n must be at least 2");
    check_points(seq.points, n, f.size(), "summability_estimate");
    double acc = 0.0;
    for (Index j = 0; j + 1 < n; ++j)
        acc += static_cast<double>(n - 1 - j) * f[seq.points[static_cast<size_t>(j)]];
    return 2.0 * acc / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double monte_carlo_estimate(const Vector& f, const Measure& v, Index n, std::uint64_t seed) {
    if (f.size() != v.size()) throw std::invalid_argument("monte_carlo_estimate: dimension mismatch");
    if (n < 1) throw std::invalid_argument("monte_carlo_estimate: n must be positive");
    std::vector<double> cum(static_cast<size_t>(v.size()));
    double total = 0.0;
    for (Index x = 0; x < v.size(); ++x) {
        total += v(x);
        cum[static_cast<size_t>(x)] = total;
    }
    Rng rng(seed);
    double acc = 0.0;
    for (Index k = 0; k < n; ++k) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const Index x = std::min<Index>(static_cast<Index>(it - cum.begin()), v.size() - 1);
        acc += f[x];
    }
    return acc / static_cast<double>(n);
}

double potential_discrepancy(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                             Index n, PotentialWeights weights) {
    if (g.size() != v.size())
        throw std::invalid_argument("potential_discrepancy: dimension mismatch");
    check_points(seq.points, n, g.size(), "potential_discrepancy");
    if (weights == PotentialWeights::Triangular && n < 2)
        throw std::invalid_argument("potential_discrepancy: triangular weights need n >= 2");

    const Vector target = g.matvec(v.values());
    Vector acc = Vector::Zero(g.size());
    if (weights == PotentialWeights::Equal) {
        for (Index j = 0; j < n; ++j) g.add_column(seq.points[static_cast<size_t>(j)], acc);
        acc /= static_cast<double>(n);
    } else {
        const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
        for (Index j = 0; j + 1 < n; ++j) {
            const double w = 2.0 * static_cast<double>(n - 1 - j) / denom;
            acc += w * g.column(seq.points[static_cast<size_t>(j)]);
        }
    }
    return (acc - target).cwiseAbs().maxCoeff();
}

double energy_distance(const EquilibriumKernel& g, const Measure& v, const LejaSequence& seq,
                       Index n) {
    if (g.size() != v.size()) throw std::invalid_argument("energy_distance: dimension mismatch");
    const Vector mu = empirical_vector(seq, n) - v.values();
    return g.quadratic(mu, mu);
}

WitnessResult witness_l1(const EquilibriumKernel& g, const Vector& f, double tol, int max_iter) {
    if (f.size() != g.size()) throw std::invalid_argument("witness_l1: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("witness_l1: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("witness_l1: max_iter must be positive");

    WitnessResult res;
    res.w = Vector::Zero(g.size());
    const double fmax = f.cwiseAbs().maxCoeff();
    if (fmax == 0.0) return res;
    const double target = tol * fmax;

    Vector r = f;
    Vector p = r;
    double rs = r.squaredNorm();
    for (int iter = 0; iter <= max_iter; ++iter) {
        res.residual = r.cwiseAbs().maxCoeff();
        res.iterations = iter;
        if (res.residual <= target) {
            res.l1 = res.w.lpNorm<1>();
            return res;
        }
        if (iter == max_iter) break;
        const Vector ap = g.matvec(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0))
            throw NumericalError(
                "witness_l1: vanishing curvature; f is not in the range of the kernel or the "
                "kernel is not positive semi-definite");
        const double step = rs / pap;
        res.w += step * p;
        // Periodic exact residual refresh counters drift in the recurrence.
        if ((iter + 1) % 50 == 0) {
            r = f - g.matvec(res.w);
        } else {
            r -= step * ap;
        }
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    throw NumericalError("witness_l1: no convergence after " + std::to_string(max_iter) +
                         " iterations (residual " + std::to_string(res.residual) + ", target " +
                         std::to_string(target) + ")");
}

double bound_quadest(const EquilibriumKernel& g, double witness_l1_norm, Index n) {
    if (n < 1) throw std::invalid_argument("bound_quadest: n must be positive");
    if (!(witness_l1_norm >= 0.0))
        throw std::invalid_argument("bound_quadest: witness norm must be non-negative");
    return 3.0 * g.norms().row_sum * witness_l1_norm / static_cast<double>(n + 1);
}

// ---------------------------------------------------------------------------
// Sequence files

namespace {
constexpr const char* kSeqMagic = "# lejaq.sequence.v1";
}

void save_sequence(const LejaSequence& seq, const SequenceHeader& header, std::ostream& out) {
    out << kSeqMagic << "\n";
    out << "# kernel " << header.kernel_hash << "\n";
    out << "# start " << header.start << "\n";
    out << "# n " << seq.points.size() << "\n";
    for (Index p : seq.points) out << p << "\n";
    if (!out) throw std::runtime_error("save_sequence: write failed");
}

void save_sequence_file(const LejaSequence& seq, const SequenceHeader& header,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    save_sequence(seq, header, out);
}

LoadedSequence load_sequence(std::istream& in) {
    LoadedSequence loaded;
    std::string line;
    int line_no = 0;
    bool saw_magic = false;
    long long expected = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kSeqMagic)
                throw std::invalid_argument("sequence file: missing magic '" +
                                            std::string(kSeqMagic) + "'");
            saw_magic = true;
            continue;
        }
        if (line.rfind("# kernel ", 0) == 0) {
            loaded.header.kernel_hash = line.substr(9);
            continue;
        }
        if (line.rfind("# start ", 0) == 0) {
            loaded.header.start = line.substr(8);
            continue;
        }
        if (line.rfind("# n ", 0) == 0) {
            expected = std::stoll(line.substr(4));
            continue;
        }
        if (!line.empty() && line[0] == '#') continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            size_t pos = 0;
            const long long v = std::stoll(line, &pos);
            if (pos != line.size() || v < 0) throw std::invalid_argument("");
            loaded.points.push_back(static_cast<Index>(v));
        } catch (const std::exception&) {
            throw std::invalid_argument("sequence file line " + std::to_string(line_no) +
                                        ": bad vertex id '" + line + "'");
        }
    }
    if (!saw_magic) throw std::invalid_argument("sequence file: empty input");
    if (loaded.points.empty()) throw std::invalid_argument("sequence file: no points");
    if (expected >= 0 && expected != static_cast<long long>(loaded.points.size()))
        throw std::invalid_argument("sequence file: header n does not match the point count");
    loaded.header.n = static_cast<Index>(loaded.points.size());
    return loaded;
}

LoadedSequence load_sequence_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return load_sequence(in);
}

}  // namespace lejaq
