#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lejaq {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Raised when an iterative procedure fails to converge or a computed
/// quantity violates a numerical contract (as opposed to a caller mistake,
/// which raises std::invalid_argument).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Max-norm style summaries of a symmetric matrix.
struct NormReport {
    double diag_max = 0.0;         ///< largest |A(x,x)|
    double row_sum = 0.0;          ///< largest absolute row sum
    double offdiag_row_sum = 0.0;  ///< largest absolute row sum excluding the diagonal
};

}  // namespace lejaq
