#include "lejaq/measure.hpp"

#include <cmath>

namespace lejaq {

namespace {

void require_positive(const Vector& v, const char* who) {
    if (v.size() == 0) throw std::invalid_argument(std::string(who) + ": empty vector");
    for (Index i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0) || !std::isfinite(v[i]))
            throw std::invalid_argument(std::string(who) + ": entries must be positive and finite");
}

}  // namespace

Measure Measure::from_values(Vector v) {
    require_positive(v, "Measure::from_values");
    const double total = v.sum();
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("Measure::from_values: values must sum to one");
    return Measure(std::move(v));
}

Measure Measure::normalized(const Vector& v) {
    require_positive(v, "Measure::normalized");
    return Measure(v / v.sum());
}

Measure Measure::uniform(Index n) {
    if (n <= 0) throw std::invalid_argument("Measure::uniform: size must be positive");
    return Measure(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Measure inverse_density_measure(const SparseSymMatrix& a) {
    const Vector deg = a.row_sums();
    for (Index x = 0; x < deg.size(); ++x)
        if (!(deg[x] > 0.0))
            throw std::invalid_argument("inverse_density_measure: vertex " + std::to_string(x) +
                                        " has non-positive weighted degree");
    return Measure::normalized(deg.cwiseInverse());
}

}  // namespace lejaq
