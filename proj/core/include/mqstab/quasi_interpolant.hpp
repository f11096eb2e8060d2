#pragma once

#include "mqstab/hierarchy.hpp"
#include "mqstab/spline.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mqstab {

/// Greville sampling matrix G (coarse.dim x fine.dim): entry (i, j) is the
/// value of fine basis function j at the i-th coarse Greville abscissa.
/// Each row has at most degree+1 nonzeros and sums to one. The composition
/// P*G represents the Greville quasi-interpolant onto the coarse space in
/// fine-basis coordinates.
Eigen::MatrixXd sampling_matrix(const SplineSpace1D& fine, const SplineSpace1D& coarse);

/// Apply per-direction matrices ops[d] (m_d x n_d) to a flattened row-major
/// coefficient tensor with shape in_dims (the Kronecker product action).
Eigen::VectorXd tensor_apply(const std::vector<Eigen::MatrixXd>& ops,
                             const std::vector<int>& in_dims, const Eigen::VectorXd& v);

/// Same action applied to every column of A at once.
Eigen::MatrixXd tensor_apply_columns(const std::vector<Eigen::MatrixXd>& ops,
                                     const std::vector<int>& in_dims, const Eigen::MatrixXd& A);

/// Per-level matrices realizing Id - Pi_k on fine coefficient tensors:
/// sampling G_k and prolongation P_k per direction, plus the cached product
/// P_k*G_k used by both apply() and the stabilization assembly.
struct FluctuationLevel {
    std::vector<Eigen::MatrixXd> sampling;        ///< G per direction (coarse x fine)
    std::vector<Eigen::MatrixXd> prolongation;    ///< P per direction (fine x coarse)
    std::vector<Eigen::MatrixXd> coarse_to_fine;  ///< P*G per direction (fine x fine)
    double weight = 0.0;                          ///< level weight c_k
};

class FluctuationOperator {
public:
    FluctuationOperator(const TensorSpace& fine, const MeshHierarchy& hier);

    int num_levels() const noexcept { return static_cast<int>(levels_.size()); }
    const FluctuationLevel& level(int k) const;
    const std::vector<int>& fine_dims() const noexcept { return dims_; }

    /// coeffs - Pi_k coeffs in fine-basis coordinates; level is 0-based.
    Eigen::VectorXd apply(int level, const Eigen::VectorXd& coeffs) const;

private:
    std::vector<int> dims_;
    std::vector<FluctuationLevel> levels_;
};

/// Free-function form of FluctuationOperator::apply.
Eigen::VectorXd fluctuation_apply(const FluctuationOperator& op, int level,
                                  const Eigen::VectorXd& coeffs);

}  // namespace mqstab
