#include "mqstab/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mqstab {

namespace {

constexpr double kZero = 0.0;

double eval_or_zero(const ScalarField& f, const Point& x) { return f ? f(x) : kZero; }

Point eval_or_zero(const VectorField& f, const Point& x) { return f ? f(x) : Point{0.0, 0.0}; }

// Per-direction cache of basis values at mapped Gauss points.
struct DirectionTable {
    std::vector<std::vector<BasisValues>> basis;  // [element][qpoint]
    std::vector<std::vector<double>> points;      // [element][qpoint]
    std::vector<double> jacobian;                 // element length / 2
    int qpoints = 0;
    GaussRule rule;
};

DirectionTable build_table(const SplineSpace1D& space, int points, int nderiv) {
    DirectionTable t;
    t.rule = quadrature_rule(points);
    t.qpoints = points;
    const auto& brk = space.breakpoints();
    const int ne = space.num_elements();
    t.basis.resize(static_cast<std::size_t>(ne));
    t.points.resize(static_cast<std::size_t>(ne));
    t.jacobian.resize(static_cast<std::size_t>(ne));
    const int capped = std::min(nderiv, space.degree());
    for (int e = 0; e < ne; ++e) {
        const double za = brk[static_cast<std::size_t>(e)];
        const double zb = brk[static_cast<std::size_t>(e) + 1];
        t.jacobian[static_cast<std::size_t>(e)] = 0.5 * (zb - za);
        auto& bs = t.basis[static_cast<std::size_t>(e)];
        auto& xs = t.points[static_cast<std::size_t>(e)];
        bs.reserve(static_cast<std::size_t>(points));
        xs.reserve(static_cast<std::size_t>(points));
        for (int q = 0; q < points; ++q) {
            const double x = 0.5 * (za + zb) + 0.5 * (zb - za) * t.rule.nodes[q];
            BasisValues bv = eval_basis(space, x, capped);
            if (capped < nderiv) {
                // zero rows for derivative orders beyond the degree
                Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(nderiv + 1, space.degree() + 1);
                ext.topRows(capped + 1) = bv.values;
                bv.values = std::move(ext);
            }
            bs.push_back(std::move(bv));
            xs.push_back(x);
        }
    }
    return t;
}

struct LocalBlock {
    std::vector<int> rows;  // global dof per local index
    Eigen::MatrixXd mat;    // nloc x nloc accumulator
    Eigen::VectorXd vec;    // nloc accumulator
};

// Generic tensor element loop for d in {1, 2}. visit(qweight, x, bvs) is
// called per quadrature point; flush(block) once per element.
template <typename Visit, typename Flush>
void element_loop(const TensorSpace& space, const std::vector<DirectionTable>& tables,
                  Visit&& visit, Flush&& flush) {
    const int d = space.num_directions();
    if (d == 1) {
        const auto& t = tables[0];
        const int p = space.direction(0).degree();
        LocalBlock block;
        block.rows.resize(static_cast<std::size_t>(p) + 1);
        for (int e = 0; e < space.direction(0).num_elements(); ++e) {
            const int span = space.direction(0).span_of_element(e);
            for (int j = 0; j <= p; ++j) block.rows[static_cast<std::size_t>(j)] = span - p + j;
            block.mat.setZero(p + 1, p + 1);
            block.vec.setZero(p + 1);
            for (int q = 0; q < t.qpoints; ++q) {
                const double w = t.jacobian[static_cast<std::size_t>(e)] * t.rule.weights[q];
                const Point x{t.points[static_cast<std::size_t>(e)][static_cast<std::size_t>(q)], 0.0};
                const std::array<const BasisValues*, 2> bvs{
                    &t.basis[static_cast<std::size_t>(e)][static_cast<std::size_t>(q)], nullptr};
                visit(block, w, x, bvs);
            }
            flush(block);
        }
        return;
    }
    const auto& t1 = tables[0];
    const auto& t2 = tables[1];
    const int p1 = space.direction(0).degree();
    const int p2 = space.direction(1).degree();
    const int n2 = space.dim_of(1);
    const int nloc = (p1 + 1) * (p2 + 1);
    LocalBlock block;
    block.rows.resize(static_cast<std::size_t>(nloc));
    for (int e1 = 0; e1 < space.direction(0).num_elements(); ++e1) {
        const int span1 = space.direction(0).span_of_element(e1);
        for (int e2 = 0; e2 < space.direction(1).num_elements(); ++e2) {
            const int span2 = space.direction(1).span_of_element(e2);
            int loc = 0;
            for (int j1 = 0; j1 <= p1; ++j1)
                for (int j2 = 0; j2 <= p2; ++j2)
                    block.rows[static_cast<std::size_t>(loc++)] = (span1 - p1 + j1) * n2 + (span2 - p2 + j2);
            block.mat.setZero(nloc, nloc);
            block.vec.setZero(nloc);
            const double jac = t1.jacobian[static_cast<std::size_t>(e1)] * t2.jacobian[static_cast<std::size_t>(e2)];
            for (int q1 = 0; q1 < t1.qpoints; ++q1) {
                for (int q2 = 0; q2 < t2.qpoints; ++q2) {
                    const double w = jac * t1.rule.weights[q1] * t2.rule.weights[q2];
                    const Point x{t1.points[static_cast<std::size_t>(e1)][static_cast<std::size_t>(q1)],
                                  t2.points[static_cast<std::size_t>(e2)][static_cast<std::size_t>(q2)]};
                    const std::array<const BasisValues*, 2> bvs{
                        &t1.basis[static_cast<std::size_t>(e1)][static_cast<std::size_t>(q1)],
                        &t2.basis[static_cast<std::size_t>(e2)][static_cast<std::size_t>(q2)]};
                    visit(block, w, x, bvs);
                }
            }
            flush(block);
        }
    }
}

// Fill per-local-dof arrays of value / first derivatives / Laplacian terms.
struct ShapeArrays {
    Eigen::VectorXd val, dx, dy, lap;
};

void fill_shapes(const TensorSpace& space, const std::array<const BasisValues*, 2>& bvs,
                 int nderiv, ShapeArrays& s) {
    const int d = space.num_directions();
    if (d == 1) {
        const auto& v = bvs[0]->values;
        const int n = static_cast<int>(v.cols());
        s.val = v.row(0);
        s.dx = v.row(1);
        s.dy = Eigen::VectorXd::Zero(n);
        if (nderiv >= 2) s.lap = v.row(2);
        return;
    }
    const auto& v1 = bvs[0]->values;
    const auto& v2 = bvs[1]->values;
    const int n1 = static_cast<int>(v1.cols());
    const int n2 = static_cast<int>(v2.cols());
    const int nloc = n1 * n2;
    s.val.resize(nloc);
    s.dx.resize(nloc);
    s.dy.resize(nloc);
    if (nderiv >= 2) s.lap.resize(nloc);
    int loc = 0;
    for (int j1 = 0; j1 < n1; ++j1) {
        for (int j2 = 0; j2 < n2; ++j2, ++loc) {
            s.val[loc] = v1(0, j1) * v2(0, j2);
            s.dx[loc] = v1(1, j1) * v2(0, j2);
            s.dy[loc] = v1(0, j1) * v2(1, j2);
            if (nderiv >= 2) s.lap[loc] = v1(2, j1) * v2(0, j2) + v1(0, j1) * v2(2, j2);
        }
    }
}

std::vector<DirectionTable> make_tables(const TensorSpace& space, int points, int nderiv) {
    std::vector<DirectionTable> tables;
    tables.reserve(static_cast<std::size_t>(space.num_directions()));
    for (int dir = 0; dir < space.num_directions(); ++dir)
        tables.push_back(build_table(space.direction(dir), points, nderiv));
    return tables;
}

SpMat triplets_to_sparse(int dim, const std::vector<Eigen::Triplet<double>>& trips) {
    SpMat A(dim, dim);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

void scatter(const LocalBlock& block, std::vector<Eigen::Triplet<double>>& trips) {
    const int n = static_cast<int>(block.rows.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (block.mat(i, j) != 0.0)
                trips.emplace_back(block.rows[static_cast<std::size_t>(i)], block.rows[static_cast<std::size_t>(j)], block.mat(i, j));
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::galerkin: return "galerkin";
        case Method::supg: return "supg";
        case Method::gls: return "gls";
        case Method::mq: return "mq";
        case Method::mq_isotropic: return "mq-iso";
    }
    return "unknown";
}

std::optional<Method> method_from_string(const std::string& name) {
    if (name == "galerkin") return Method::galerkin;
    if (name == "supg") return Method::supg;
    if (name == "gls") return Method::gls;
    if (name == "mq") return Method::mq;
    if (name == "mq-iso" || name == "mq_isotropic" || name == "mq-isotropic") return Method::mq_isotropic;
    return std::nullopt;
}

int system_quadrature_points(const TensorSpace& space) {
    int p = 0;
    for (int d = 0; d < space.num_directions(); ++d) p = std::max(p, space.direction(d).degree());
    return p + 1;
}

AssembledSystem assemble_galerkin(const TensorSpace& space, const ProblemSpec& prob) {
    const int points = system_quadrature_points(space);
    const auto tables = make_tables(space, points, 1);
    std::vector<Eigen::Triplet<double>> trips;
    ShapeArrays s;

    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point& x, const std::array<const BasisValues*, 2>& bvs) {
            fill_shapes(space, bvs, 1, s);
            const Point b = eval_or_zero(prob.advection, x);
            const double c = eval_or_zero(prob.reaction, x);
            const int n = static_cast<int>(s.val.size());
            for (int j = 0; j < n; ++j) {
                const double adv_j = b[0] * s.dx[j] + b[1] * s.dy[j];
                for (int i = 0; i < n; ++i) {
                    const double diff = prob.epsilon * (s.dx[j] * s.dx[i] + s.dy[j] * s.dy[i]);
                    block.mat(i, j) += w * (diff + adv_j * s.val[i] + c * s.val[j] * s.val[i]);
                }
            }
        },
        [&](const LocalBlock& block) { scatter(block, trips); });

    AssembledSystem out;
    out.matrix = triplets_to_sparse(space.dim(), trips);
    out.load = assemble_load(space, prob.source, prob.source_quadrature_boost);
    return out;
}

Eigen::VectorXd assemble_load(const TensorSpace& space, const ScalarField& f, int extra_points) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space.dim());
    if (!f) return F;
    const int points = system_quadrature_points(space) + extra_points;
    const auto tables = make_tables(space, points, 0);
    ShapeArrays s;
    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point& x, const std::array<const BasisValues*, 2>& bvs) {
            fill_shapes(space, bvs, 0, s);
            const double fx = f(x);
            if (fx == 0.0) return;
            block.vec += (w * fx) * s.val;
        },
        [&](const LocalBlock& block) {
            for (int i = 0; i < static_cast<int>(block.rows.size()); ++i)
                F[block.rows[static_cast<std::size_t>(i)]] += block.vec[i];
        });
    return F;
}

SpMat assemble_streamline_matrix(const TensorSpace& space, const ProblemSpec& prob) {
    const int points = system_quadrature_points(space);
    const auto tables = make_tables(space, points, 1);
    std::vector<Eigen::Triplet<double>> trips;
    ShapeArrays s;
    Eigen::VectorXd stream;

    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point& x, const std::array<const BasisValues*, 2>& bvs) {
            fill_shapes(space, bvs, 1, s);
            const Point b = eval_or_zero(prob.advection, x);
            stream = b[0] * s.dx + b[1] * s.dy;
            // rank-one update keeps the block bitwise symmetric
            const int n = static_cast<int>(stream.size());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) block.mat(i, j) += w * (stream[j] * stream[i]);
        },
        [&](const LocalBlock& block) { scatter(block, trips); });
    return triplets_to_sparse(space.dim(), trips);
}

SpMat assemble_gradient_matrix(const TensorSpace& space) {
    const int points = system_quadrature_points(space);
    const auto tables = make_tables(space, points, 1);
    std::vector<Eigen::Triplet<double>> trips;
    ShapeArrays s;
    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point&, const std::array<const BasisValues*, 2>& bvs) {
            fill_shapes(space, bvs, 1, s);
            const int n = static_cast<int>(s.val.size());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    block.mat(i, j) += w * (s.dx[j] * s.dx[i] + s.dy[j] * s.dy[i]);
        },
        [&](const LocalBlock& block) { scatter(block, trips); });
    return triplets_to_sparse(space.dim(), trips);
}

SpMat assemble_weighted_mass(const TensorSpace& space, const ScalarField& weight, int extra_points) {
    const int points = system_quadrature_points(space) + extra_points;
    const auto tables = make_tables(space, points, 0);
    std::vector<Eigen::Triplet<double>> trips;
    ShapeArrays s;
    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point& x, const std::array<const BasisValues*, 2>& bvs) {
            fill_shapes(space, bvs, 0, s);
            const double c = weight ? weight(x) : 1.0;
            const int n = static_cast<int>(s.val.size());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) block.mat(i, j) += (w * c) * (s.val[j] * s.val[i]);
        },
        [&](const LocalBlock& block) { scatter(block, trips); });
    return triplets_to_sparse(space.dim(), trips);
}

Eigen::MatrixXd assemble_mq_stabilization(const TensorSpace& space, const MeshHierarchy& hier,
                                          const FluctuationOperator& fluct,
                                          const ProblemSpec& prob, const StabConfig& cfg) {
    if (cfg.method != Method::mq && cfg.method != Method::mq_isotropic)
        throw std::invalid_argument("assemble_mq_stabilization: method must be mq or mq-iso");
    if (cfg.cb < 0.0) throw std::invalid_argument("assemble_mq_stabilization: cb must be >= 0");
    if (cfg.levels < 1) throw std::invalid_argument("assemble_mq_stabilization: levels must be >= 1");
    if (fluct.num_levels() < cfg.levels || hier.num_levels() < cfg.levels)
        throw std::invalid_argument("assemble_mq_stabilization: hierarchy has fewer levels than requested");

    double h = cfg.h_def;
    if (h <= 0.0) {
        for (int d = 0; d < space.num_directions(); ++d)
            h = std::max(h, space.direction(d).max_mesh_size());
    }
    const double tau = cfg.cb * h;

    const Eigen::MatrixXd D = (cfg.method == Method::mq)
                                  ? Eigen::MatrixXd(assemble_streamline_matrix(space, prob))
                                  : Eigen::MatrixXd(assemble_gradient_matrix(space));
    const std::vector<int>& dims = fluct.fine_dims();

    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(space.dim(), space.dim());
    for (int k = 0; k < cfg.levels; ++k) {
        const FluctuationLevel& lvl = fluct.level(k);
        std::vector<Eigen::MatrixXd> pgT;
        pgT.reserve(lvl.coarse_to_fine.size());
        for (const auto& M : lvl.coarse_to_fine) pgT.push_back(M.transpose());

        // F^T D F = D - U - U^T + Pi^T D Pi with U = Pi^T D; the temporaries
        // below are entrywise symmetric, which keeps S bitwise symmetric
        const Eigen::MatrixXd U = tensor_apply_columns(pgT, dims, D);
        const Eigen::MatrixXd W = tensor_apply_columns(pgT, dims, Eigen::MatrixXd(U.transpose()));
        const Eigen::MatrixXd cross = U + U.transpose();
        const Eigen::MatrixXd congr = 0.5 * (W + W.transpose());
        S.noalias() += lvl.weight * (D - cross + congr);
    }
    S *= tau;
    return S;
}

double upwind_function(double peclet) {
    if (peclet < 1e-4) return peclet / 3.0 - peclet * peclet * peclet / 45.0;
    return 1.0 / std::tanh(peclet) - 1.0 / peclet;
}

AssembledSystem assemble_supg(const TensorSpace& space, const ProblemSpec& prob, Method method) {
    if (method != Method::supg && method != Method::gls)
        throw std::invalid_argument("assemble_supg: method must be supg or gls");
    const int points = system_quadrature_points(space);
    const auto tables = make_tables(space, points, 2);
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(space.dim());
    ShapeArrays s;

    // per-element diameter and centroid tau
    const int d = space.num_directions();
    const auto element_tau = [&](const Point& centroid, double diam) {
        const Point b = eval_or_zero(prob.advection, centroid);
        const double bnorm = std::sqrt(b[0] * b[0] + b[1] * b[1]);
        if (bnorm == 0.0) return 0.0;
        if (prob.epsilon == 0.0) return diam / (2.0 * bnorm);
        const double pe = bnorm * diam / (2.0 * prob.epsilon);
        return diam / (2.0 * bnorm) * upwind_function(pe);
    };

    // width per direction is constant within an element; recover it from the jacobians
    std::vector<double> current_tau_storage;
    double current_tau = 0.0;

    const auto visit = [&](LocalBlock& block, double w, const Point& x,
                           const std::array<const BasisValues*, 2>& bvs) {
        fill_shapes(space, bvs, 2, s);
        const Point b = eval_or_zero(prob.advection, x);
        const double c = eval_or_zero(prob.reaction, x);
        const double fx = eval_or_zero(prob.source, x);
        const int n = static_cast<int>(s.val.size());
        const double tau = current_tau;
        if (tau == 0.0) return;
        for (int i = 0; i < n; ++i) {
            const double adv_i = b[0] * s.dx[i] + b[1] * s.dy[i];
            const double test_i = (method == Method::supg)
                                      ? adv_i
                                      : prob.epsilon * s.lap[i] + adv_i + c * s.val[i];
            for (int j = 0; j < n; ++j) {
                const double res_j = -prob.epsilon * s.lap[j] + b[0] * s.dx[j] + b[1] * s.dy[j] + c * s.val[j];
                block.mat(i, j) += w * tau * res_j * test_i;
            }
            block.vec[i] += w * tau * fx * test_i;
        }
    };

    // element geometry pass wrapped around the shared loop: precompute tau
    // per element in the same iteration order the loop uses
    {
        std::vector<double> taus;
        if (d == 1) {
            const auto& brk = space.direction(0).breakpoints();
            for (std::size_t e = 0; e + 1 < brk.size(); ++e) {
                const double len = brk[e + 1] - brk[e];
                taus.push_back(element_tau(Point{0.5 * (brk[e] + brk[e + 1]), 0.0}, len));
            }
        } else {
            const auto& b1 = space.direction(0).breakpoints();
            const auto& b2 = space.direction(1).breakpoints();
            for (std::size_t e1 = 0; e1 + 1 < b1.size(); ++e1) {
                for (std::size_t e2 = 0; e2 + 1 < b2.size(); ++e2) {
                    const double l1 = b1[e1 + 1] - b1[e1];
                    const double l2 = b2[e2 + 1] - b2[e2];
                    taus.push_back(element_tau(
                        Point{0.5 * (b1[e1] + b1[e1 + 1]), 0.5 * (b2[e2] + b2[e2 + 1])},
                        std::sqrt(l1 * l1 + l2 * l2)));
                }
            }
        }
        current_tau_storage = std::move(taus);
    }

    std::size_t element_counter = 0;
    element_loop(
        space, tables,
        [&](LocalBlock& block, double w, const Point& x, const std::array<const BasisValues*, 2>& bvs) {
            current_tau = current_tau_storage[element_counter];
            visit(block, w, x, bvs);
        },
        [&](const LocalBlock& block) {
            ++element_counter;
            scatter(block, trips);
            for (int i = 0; i < static_cast<int>(block.rows.size()); ++i)
                F[block.rows[static_cast<std::size_t>(i)]] += block.vec[i];
        });

    AssembledSystem out;
    out.matrix = triplets_to_sparse(space.dim(), trips);
    out.load = std::move(F);
    return out;
}

DiscreteSystem apply_dirichlet(const TensorSpace& space, const Eigen::MatrixXd& A_full,
                               const Eigen::VectorXd& F_full, const ProblemSpec& prob) {
    const int d = space.num_directions();
    const int n = space.dim();
    if (A_full.rows() != n || F_full.size() != n)
        throw std::invalid_argument("apply_dirichlet: dimension mismatch");

    std::vector<Eigen::VectorXd> greville;
    greville.reserve(static_cast<std::size_t>(d));
    for (int dir = 0; dir < d; ++dir) greville.push_back(greville_abscissae(space.direction(dir)));

    std::vector<char> constrained(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd lift = Eigen::VectorXd::Zero(n);

    // lower face index wins at corners: first claim stays
    for (int face = 0; face < 2 * d; ++face) {
        const int dir = face / 2;
        const int side = face % 2;
        const FaceCondition& fc = prob.faces[static_cast<std::size_t>(face)];
        if (fc.kind != BoundaryKind::dirichlet) continue;
        if (!fc.value) throw std::invalid_argument("apply_dirichlet: Dirichlet face without data");
        const int fixed = side == 0 ? 0 : space.dim_of(dir) - 1;
        const double coord = side == 0 ? space.direction(dir).a() : space.direction(dir).b();

        if (d == 1) {
            if (!constrained[static_cast<std::size_t>(fixed)]) {
                constrained[static_cast<std::size_t>(fixed)] = 1;
                lift[fixed] = fc.value(Point{coord, 0.0});
            }
            continue;
        }
        const int other = 1 - dir;
        for (int i = 0; i < space.dim_of(other); ++i) {
            const int idx = dir == 0 ? fixed * space.dim_of(1) + i : i * space.dim_of(1) + fixed;
            if (constrained[static_cast<std::size_t>(idx)]) continue;
            constrained[static_cast<std::size_t>(idx)] = 1;
            Point x{};
            x[static_cast<std::size_t>(dir)] = coord;
            x[static_cast<std::size_t>(other)] = greville[static_cast<std::size_t>(other)][i];
            lift[idx] = fc.value(x);
        }
    }

    DiscreteSystem sys;
    sys.full_to_free.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (!constrained[static_cast<std::size_t>(i)]) {
            sys.full_to_free[static_cast<std::size_t>(i)] = static_cast<int>(sys.free_to_full.size());
            sys.free_to_full.push_back(i);
        }
    }
    const int nf = static_cast<int>(sys.free_to_full.size());
    sys.lift = lift;

    Eigen::VectorXd correction = A_full * lift;
    sys.matrix.resize(nf, nf);
    sys.rhs.resize(nf);
    for (int i = 0; i < nf; ++i) {
        const int gi = sys.free_to_full[static_cast<std::size_t>(i)];
        sys.rhs[i] = F_full[gi] - correction[gi];
        for (int j = 0; j < nf; ++j) sys.matrix(i, j) = A_full(gi, sys.free_to_full[static_cast<std::size_t>(j)]);
    }
    return sys;
}

}  // namespace mqstab
