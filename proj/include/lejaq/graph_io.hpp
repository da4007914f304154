#pragma once

#include "lejaq/measure.hpp"
#include "lejaq/point_cloud.hpp"
#include "lejaq/sparse_sym.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lejaq {

/// Parses a whitespace-separated edge list: `u v [weight]` per line, ids
/// 0-based, weight defaulting to 1.  `#` starts a comment; blank lines are
/// skipped.  The vertex count is max id + 1.  Negative weights, malformed
/// ids and conflicting duplicate edges are errors.
SparseSymMatrix load_edge_list(std::istream& in);
SparseSymMatrix load_edge_list_file(const std::string& path);

/// Parses one positive real per line (comments and blanks as above) and
/// normalizes to total one.  When the raw total differs from one by more
/// than 1e-6 a note is written to `warn`, if given.
Measure load_measure(std::istream& in, std::ostream* warn = nullptr);
Measure load_measure_file(const std::string& path, std::ostream* warn = nullptr);

/// Parses comma-separated coordinates, one point per line; every line must
/// have the same dimension.
PointCloud load_cloud_csv(std::istream& in);
PointCloud load_cloud_csv_file(const std::string& path);

/// Parses one real per line (comments and blanks as above), without the
/// positivity and normalization rules of a measure.
Vector load_vector(std::istream& in);
Vector load_vector_file(const std::string& path);

/// Parses one integer label per line (comments and blanks as above).
std::vector<int> load_labels(std::istream& in);
std::vector<int> load_labels_file(const std::string& path);

}  // namespace lejaq
