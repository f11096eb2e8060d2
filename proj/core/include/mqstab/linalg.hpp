#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace mqstab::linalg {

/// Thrown when a factorization or solve cannot reach the required accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solve A x = b by LU with partial pivoting; iterative refinement keeps the
/// residual below 1e-10 * (|A| |x| + |b|). Throws NumericalError when the
/// matrix is singular to working precision.
Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

/// Smallest eigenvalue of the symmetric pencil A q = lambda M q with A
/// symmetric PSD and M symmetric positive definite, via Cholesky of M and a
/// symmetric eigensolve of the congruent problem.
double sym_generalized_eigmin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M);

/// Spectral condition number sigma_max / sigma_min; +infinity for a matrix
/// that is singular to working precision.
double condition_number_2(const Eigen::MatrixXd& A);

}  // namespace mqstab::linalg
