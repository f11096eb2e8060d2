#include "mqstab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace mqstab::linalg {

Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    if (A.rows() != A.cols()) throw NumericalError("lu_solve: matrix must be square");
    if (A.rows() != b.size()) throw NumericalError("lu_solve: dimension mismatch");

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite()) throw NumericalError("lu_solve: singular to working precision");

    const double norm_A = A.lpNorm<Eigen::Infinity>();
    const double norm_b = b.lpNorm<Eigen::Infinity>();
    const auto tolerance = [&](const Eigen::VectorXd& sol) {
        return 1e-10 * (norm_A * sol.lpNorm<Eigen::Infinity>() + norm_b);
    };

    Eigen::VectorXd r = b - A * x;
    for (int iter = 0; iter < 3 && r.lpNorm<Eigen::Infinity>() > tolerance(x); ++iter) {
        x += lu.solve(r);
        r = b - A * x;
    }
    if (!(r.lpNorm<Eigen::Infinity>() <= tolerance(x)))
        throw NumericalError("lu_solve: residual did not reach the backward-error bound");
    return x;
}

double sym_generalized_eigmin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
    if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows())
        throw NumericalError("sym_generalized_eigmin: dimension mismatch");
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw NumericalError("sym_generalized_eigmin: M is not positive definite");

    // L^{-1} A L^{-T}, kept explicitly symmetric
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(A);
    B = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(B.transpose()));
    B = 0.5 * (B + B.transpose()).eval();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("sym_generalized_eigmin: eigensolver failed");
    return es.eigenvalues()(0);
}

double condition_number_2(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw NumericalError("condition_number_2: matrix must be square");
    if (A.rows() == 0) return 1.0;
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (smax == 0.0) return std::numeric_limits<double>::infinity();
    const double eps = std::numeric_limits<double>::epsilon();
    if (smin <= smax * eps * static_cast<double>(A.rows()))
        return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace mqstab::linalg
