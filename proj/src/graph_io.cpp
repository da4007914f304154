#include "lejaq/graph_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lejaq {

namespace {

/// Strips a trailing comment and surrounding whitespace; empty result means
/// the line carries no data.
std::string strip(const std::string& line) {
    std::string s = line.substr(0, line.find('#'));
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

Index parse_vertex_id(const std::string& tok, int line_no) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(tok, &pos);
        if (pos != tok.size() || v < 0) throw std::invalid_argument("");
        return static_cast<Index>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad vertex id '" + tok + "'");
    }
}

double parse_real(const std::string& tok, int line_no) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return in;
}

}  // namespace

SparseSymMatrix load_edge_list(std::istream& in) {
    std::vector<WeightedEdge> edges;
    Index max_id = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string data = strip(line);
        if (data.empty()) continue;
        std::istringstream row(data);
        std::string tu, tv, tw, extra;
        row >> tu >> tv;
        if (tv.empty())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'u v [weight]'");
        WeightedEdge e;
        e.u = parse_vertex_id(tu, line_no);
        e.v = parse_vertex_id(tv, line_no);
        e.w = 1.0;
        if (row >> tw) e.w = parse_real(tw, line_no);
        if (row >> extra)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": trailing tokens");
        if (e.w < 0.0)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": negative weight");
        max_id = std::max({max_id, e.u, e.v});
        edges.push_back(e);
    }
    if (max_id < 0) throw std::invalid_argument("edge list contains no edges");
    return SparseSymMatrix::from_edges(max_id + 1, edges);
}

SparseSymMatrix load_edge_list_file(const std::string& path) {
    auto in = open_input(path);
    return load_edge_list(in);
}

Measure load_measure(std::istream& in, std::ostream* warn) {
    std::vector<double> vals;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string data = strip(line);
        if (data.empty()) continue;
        const double v = parse_real(data, line_no);
        if (!(v > 0.0))
            throw std::invalid_argument("line " + std::to_string(line_no) + ": measure entries must be positive");
        vals.push_back(v);
    }
    if (vals.empty()) throw std::invalid_argument("measure file contains no values");
    Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
    const double total = v.sum();
    if (warn && std::abs(total - 1.0) > 1e-6)
        *warn << "note: measure sums to " << total << "; normalizing\n";
    return Measure::normalized(v);
}

Measure load_measure_file(const std::string& path, std::ostream* warn) {
    auto in = open_input(path);
    return load_measure(in, warn);
}

PointCloud load_cloud_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string data = strip(line);
        if (data.empty()) continue;
        std::vector<double> coords;
        std::istringstream row(data);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            const std::string t = strip(cell);
            if (t.empty())
                throw std::invalid_argument("line " + std::to_string(line_no) + ": empty coordinate");
            coords.push_back(parse_real(t, line_no));
        }
        if (coords.empty())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": empty point");
        if (!rows.empty() && coords.size() != rows.front().size())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": inconsistent dimension");
        rows.push_back(std::move(coords));
    }
    if (rows.empty()) throw std::invalid_argument("point cloud file contains no points");
    Matrix coords(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < coords.rows(); ++i)
        for (Index j = 0; j < coords.cols(); ++j)
            coords(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return PointCloud{std::move(coords)};
}

PointCloud load_cloud_csv_file(const std::string& path) {
    auto in = open_input(path);
    return load_cloud_csv(in);
}

Vector load_vector(std::istream& in) {
    std::vector<double> vals;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string data = strip(line);
        if (data.empty()) continue;
        vals.push_back(parse_real(data, line_no));
    }
    if (vals.empty()) throw std::invalid_argument("vector file contains no values");
    return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

Vector load_vector_file(const std::string& path) {
    auto in = open_input(path);
    return load_vector(in);
}

std::vector<int> load_labels(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string data = strip(line);
        if (data.empty()) continue;
        try {
            size_t pos = 0;
            const int v = std::stoi(data, &pos);
            if (pos != data.size()) throw std::invalid_argument("");
            labels.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": bad label '" + data + "'");
        }
    }
    if (labels.empty()) throw std::invalid_argument("label file contains no labels");
    return labels;
}

std::vector<int> load_labels_file(const std::string& path) {
    auto in = open_input(path);
    return load_labels(in);
}

}  // namespace lejaq
