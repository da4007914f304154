#pragma once

#include "lejaq/sparse_sym.hpp"
#include "lejaq/types.hpp"

namespace lejaq {

/// Strictly positive probability vector on the vertices of a graph.
class Measure {
public:
    /// Accepts v as-is; every entry must be positive and the total must be
    /// within 1e-12 of one.
    static Measure from_values(Vector v);

    /// Rescales a positive vector to total one.
    static Measure normalized(const Vector& v);

    static Measure uniform(Index n);

    Index size() const { return v_.size(); }
    const Vector& values() const { return v_; }
    double operator()(Index x) const { return v_[x]; }

    double min_value() const { return v_.minCoeff(); }
    double max_value() const { return v_.maxCoeff(); }

private:
    explicit Measure(Vector v) : v_(std::move(v)) {}
    Vector v_;
};

/// Measure proportional to 1/degree.  Weighted degrees must be positive on
/// every vertex (no isolated vertices).
Measure inverse_density_measure(const SparseSymMatrix& a);

}  // namespace lejaq
