#include "mqstab/infsup.hpp"

#include "mqstab/assembly.hpp"
#include "mqstab/hierarchy.hpp"
#include "mqstab/linalg.hpp"
#include "mqstab/quadrature.hpp"
#include "mqstab/spline.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace mqstab {

double compute_infsup(int degree, int levels, int elements) {
    if (degree < 2) throw std::invalid_argument("compute_infsup: degree must be >= 2");
    if (levels < 1) throw std::invalid_argument("compute_infsup: levels must be >= 1");
    if (elements % (1 << levels) != 0)
        throw std::invalid_argument("compute_infsup: elements must be divisible by 2^levels");

    const SplineSpace1D fine = make_uniform_space(0.0, 1.0, elements, degree);
    SplineSpace1D coarse_mesh = fine;
    for (int k = 0; k < levels; ++k) coarse_mesh = dyadic_coarsen(coarse_mesh);
    // degree p-1 space on the coarsened breakpoints
    const auto& brk = coarse_mesh.breakpoints();
    std::vector<double> t;
    const int q = degree - 1;
    for (int i = 0; i <= q; ++i) t.push_back(brk.front());
    for (std::size_t i = 1; i + 1 < brk.size(); ++i) t.push_back(brk[i]);
    for (int i = 0; i <= q; ++i) t.push_back(brk.back());
    const SplineSpace1D coarse(KnotVector(std::move(t), q));
    if (coarse.dim() < 1) throw std::invalid_argument("compute_infsup: empty coarse space");

    // all products integrated on the fine elements with degree+1 points
    const GaussRule rule = quadrature_rule(degree + 1);
    const int nq = rule.size();
    const auto& fb = fine.breakpoints();
    const int nf = fine.dim();
    const int nc = coarse.dim();

    Eigen::MatrixXd MV = Eigen::MatrixXd::Zero(nf, nf);
    Eigen::MatrixXd MQ = Eigen::MatrixXd::Zero(nc, nc);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nc, nf);

    for (int e = 0; e < fine.num_elements(); ++e) {
        const double za = fb[static_cast<std::size_t>(e)];
        const double zb = fb[static_cast<std::size_t>(e) + 1];
        const double jac = 0.5 * (zb - za);
        for (int k = 0; k < nq; ++k) {
            const double x = 0.5 * (za + zb) + jac * rule.nodes[k];
            const double w = jac * rule.weights[k];
            const BasisValues bf = eval_basis(fine, x, 0);
            const BasisValues bc = eval_basis(coarse, x, 0);
            for (int j = 0; j <= degree; ++j) {
                const int gj = bf.span - degree + j;
                for (int i = 0; i <= degree; ++i)
                    MV(bf.span - degree + i, gj) += w * bf.values(0, j) * bf.values(0, i);
                for (int i = 0; i <= q; ++i)
                    B(bc.span - q + i, gj) += w * bf.values(0, j) * bc.values(0, i);
            }
            for (int j = 0; j <= q; ++j)
                for (int i = 0; i <= q; ++i)
                    MQ(bc.span - q + i, bc.span - q + j) += w * bc.values(0, j) * bc.values(0, i);
        }
    }

    // H^1_0 constraint on the fine space: drop the two boundary functions
    const int free = nf - 2;
    const Eigen::MatrixXd MVf = MV.block(1, 1, free, free);
    const Eigen::MatrixXd Bf = B.middleCols(1, free);

    const Eigen::LLT<Eigen::MatrixXd> llt(MVf);
    if (llt.info() != Eigen::Success)
        throw linalg::NumericalError("compute_infsup: fine mass matrix not positive definite");
    const Eigen::MatrixXd X = llt.solve(Bf.transpose());
    const Eigen::MatrixXd pencil = Bf * X;

    const double lambda = linalg::sym_generalized_eigmin(pencil, MQ);
    if (lambda < 0.0 && lambda > -1e-14) return 0.0;
    return std::sqrt(lambda);
}

}  // namespace mqstab
