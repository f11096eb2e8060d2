#include "mqstab/quasi_interpolant.hpp"

#include <stdexcept>

namespace mqstab {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Apply M along one axis of a flat row-major tensor (outer, n, inner) -> (outer, m, inner).
Eigen::VectorXd apply_axis(const Eigen::MatrixXd& M, const Eigen::VectorXd& v,
                           Eigen::Index outer, Eigen::Index n, Eigen::Index inner) {
    const Eigen::Index m = M.rows();
    Eigen::VectorXd out(outer * m * inner);
    if (inner == 1) {
        // rows of (outer x n) times M^T
        RowMajorMap src(v.data(), outer, n);
        RowMajorMutMap dst(out.data(), outer, m);
        dst.noalias() = src * M.transpose();
    } else {
        for (Eigen::Index o = 0; o < outer; ++o) {
            RowMajorMap src(v.data() + o * n * inner, n, inner);
            RowMajorMutMap dst(out.data() + o * m * inner, m, inner);
            dst.noalias() = M * src;
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd sampling_matrix(const SplineSpace1D& fine, const SplineSpace1D& coarse) {
    if (fine.degree() != coarse.degree())
        throw std::invalid_argument("sampling_matrix: degree mismatch");
    // nestedness check shares the prolongation validation
    (void)prolongation_matrix(coarse, fine);

    const Eigen::VectorXd greville = greville_abscissae(coarse);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(coarse.dim(), fine.dim());
    const int p = fine.degree();
    for (int i = 0; i < coarse.dim(); ++i) {
        const BasisValues bv = eval_basis(fine, greville[i], 0);
        for (int j = 0; j <= p; ++j) G(i, bv.span - p + j) = bv.values(0, j);
    }
    return G;
}

Eigen::VectorXd tensor_apply(const std::vector<Eigen::MatrixXd>& ops,
                             const std::vector<int>& in_dims, const Eigen::VectorXd& v) {
    const int d = static_cast<int>(ops.size());
    if (static_cast<int>(in_dims.size()) != d)
        throw std::invalid_argument("tensor_apply: dims/ops size mismatch");
    Eigen::Index expected = 1;
    for (const int n : in_dims) expected *= n;
    if (v.size() != expected) throw std::invalid_argument("tensor_apply: coefficient shape mismatch");

    Eigen::VectorXd cur = v;
    std::vector<Eigen::Index> shape(in_dims.begin(), in_dims.end());
    for (int a = 0; a < d; ++a) {
        Eigen::Index outer = 1, inner = 1;
        for (int k = 0; k < a; ++k) outer *= shape[static_cast<std::size_t>(k)];
        for (int k = a + 1; k < d; ++k) inner *= shape[static_cast<std::size_t>(k)];
        cur = apply_axis(ops[static_cast<std::size_t>(a)], cur, outer, shape[static_cast<std::size_t>(a)], inner);
        shape[static_cast<std::size_t>(a)] = ops[static_cast<std::size_t>(a)].rows();
    }
    return cur;
}

Eigen::MatrixXd tensor_apply_columns(const std::vector<Eigen::MatrixXd>& ops,
                                     const std::vector<int>& in_dims, const Eigen::MatrixXd& A) {
    // Column-major A holds columns contiguously, so the whole matrix is one
    // flat row-major tensor (cols, dims...) and the columns batch into a
    // single sweep of axis applications.
    const int d = static_cast<int>(ops.size());
    std::vector<Eigen::MatrixXd> ext;
    ext.reserve(static_cast<std::size_t>(d) + 1);
    std::vector<int> dims_ext;
    dims_ext.reserve(static_cast<std::size_t>(d) + 1);
    ext.push_back(Eigen::MatrixXd::Identity(A.cols(), A.cols()));
    dims_ext.push_back(static_cast<int>(A.cols()));
    for (int a = 0; a < d; ++a) {
        ext.push_back(ops[static_cast<std::size_t>(a)]);
        dims_ext.push_back(in_dims[static_cast<std::size_t>(a)]);
    }

    Eigen::Index out_rows = 1;
    for (const auto& M : ops) out_rows *= M.rows();

    const Eigen::Map<const Eigen::VectorXd> flat(A.data(), A.size());
    Eigen::VectorXd cur = flat;
    std::vector<Eigen::Index> shape(dims_ext.begin(), dims_ext.end());
    for (int a = 1; a <= d; ++a) {  // skip the identity axis
        Eigen::Index outer = 1, inner = 1;
        for (int k = 0; k < a; ++k) outer *= shape[static_cast<std::size_t>(k)];
        for (int k = a + 1; k <= d; ++k) inner *= shape[static_cast<std::size_t>(k)];
        cur = apply_axis(ext[static_cast<std::size_t>(a)], cur, outer, shape[static_cast<std::size_t>(a)], inner);
        shape[static_cast<std::size_t>(a)] = ext[static_cast<std::size_t>(a)].rows();
    }
    return Eigen::Map<const Eigen::MatrixXd>(cur.data(), out_rows, A.cols());
}

FluctuationOperator::FluctuationOperator(const TensorSpace& fine, const MeshHierarchy& hier)
    : dims_(fine.dims()) {
    const int d = fine.num_directions();
    levels_.reserve(static_cast<std::size_t>(hier.num_levels()));
    for (const auto& lvl : hier.levels) {
        if (static_cast<int>(lvl.spaces.size()) != d)
            throw std::invalid_argument("FluctuationOperator: hierarchy/space direction mismatch");
        FluctuationLevel op;
        op.weight = lvl.weight;
        for (int dir = 0; dir < d; ++dir) {
            const auto& fs = fine.direction(dir);
            const auto& cs = lvl.spaces[static_cast<std::size_t>(dir)];
            Eigen::MatrixXd G = sampling_matrix(fs, cs);
            Eigen::MatrixXd P = prolongation_matrix(cs, fs);
            op.coarse_to_fine.push_back(P * G);
            op.sampling.push_back(std::move(G));
            op.prolongation.push_back(std::move(P));
        }
        levels_.push_back(std::move(op));
    }
}

const FluctuationLevel& FluctuationOperator::level(int k) const {
    if (k < 0 || k >= num_levels()) throw std::out_of_range("FluctuationOperator: level out of range");
    return levels_[static_cast<std::size_t>(k)];
}

Eigen::VectorXd FluctuationOperator::apply(int level, const Eigen::VectorXd& coeffs) const {
    const FluctuationLevel& op = this->level(level);
    Eigen::Index expected = 1;
    for (const int n : dims_) expected *= n;
    if (coeffs.size() != expected)
        throw std::invalid_argument("fluctuation_apply: coefficient shape mismatch");
    return coeffs - tensor_apply(op.coarse_to_fine, dims_, coeffs);
}

Eigen::VectorXd fluctuation_apply(const FluctuationOperator& op, int level,
                                  const Eigen::VectorXd& coeffs) {
    return op.apply(level, coeffs);
}

}  // namespace mqstab
