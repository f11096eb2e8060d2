#include "mqstab/benchmarks.hpp"

#include "mqstab/hierarchy.hpp"
#include "mqstab/linalg.hpp"
#include "mqstab/quadrature.hpp"
#include "mqstab/quasi_interpolant.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mqstab::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- benchmark 1: u' + u = 5*[1/3 <= x <= 2/3], u(0) = 0 --------------------

double test1_exact(double x) {
    constexpr double x0 = 1.0 / 3.0;
    constexpr double x1 = 2.0 / 3.0;
    if (x <= x0) return 0.0;
    if (x <= x1) return 5.0 * (1.0 - std::exp(-(x - x0)));
    return 5.0 * (1.0 - std::exp(-(x1 - x0))) * std::exp(-(x - x1));
}

double test1_exact_dx(double x) {
    constexpr double x0 = 1.0 / 3.0;
    constexpr double x1 = 2.0 / 3.0;
    if (x <= x0) return 0.0;
    if (x <= x1) return 5.0 * std::exp(-(x - x0));
    return -test1_exact(x);
}

// ---- benchmark 2: -eps u'' + u' = 1, u(0) = u(1) = 0 ------------------------

constexpr double kTest2Eps = 1e-5;

double test2_exact(double x) {
    // underflow-safe: u = x - e^{(x-1)/eps} (1 - e^{-x/eps}) / (1 - e^{-1/eps})
    const double denom = 1.0 - std::exp(-1.0 / kTest2Eps);
    return x - std::exp((x - 1.0) / kTest2Eps) * (1.0 - std::exp(-x / kTest2Eps)) / denom;
}

double test2_exact_dx(double x) {
    const double denom = 1.0 - std::exp(-1.0 / kTest2Eps);
    return 1.0 - std::exp((x - 1.0) / kTest2Eps) / (kTest2Eps * denom);
}

// ---- benchmark 6: d_y u = layer source, u(x, 0) = 0 -------------------------

constexpr double kTest6Eps = 0.004;
constexpr double kTest6A = 2.0 / 3.0;

double test6_source(double y) {
    const double t = std::tanh((y - kTest6A) / kTest6Eps);
    return (1.0 - t * t) / (2.0 * kTest6Eps);
}

double test6_exact(double y) { return 0.5 * (std::tanh((y - kTest6A) / kTest6Eps) + 1.0); }

ScalarField constant_field(double v) {
    return [v](const Point&) { return v; };
}

// Dense matrix of basis values at a list of points: rows = points, cols = dofs.
Eigen::MatrixXd basis_matrix_at(const SplineSpace1D& space, const std::vector<double>& pts,
                                int deriv) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()), space.dim());
    const int p = space.degree();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const BasisValues bv = eval_basis(space, pts[k], deriv);
        for (int j = 0; j <= p; ++j)
            B(static_cast<Eigen::Index>(k), bv.span - p + j) = bv.values(deriv, j);
    }
    return B;
}

struct QuadGrid {
    std::vector<double> points;
    Eigen::VectorXd weights;
};

QuadGrid quad_grid(const SplineSpace1D& space, int points_per_element) {
    const GaussRule rule = quadrature_rule(points_per_element);
    const auto& brk = space.breakpoints();
    QuadGrid g;
    const int total = space.num_elements() * points_per_element;
    g.points.reserve(static_cast<std::size_t>(total));
    g.weights.resize(total);
    int idx = 0;
    for (int e = 0; e < space.num_elements(); ++e) {
        const double za = brk[static_cast<std::size_t>(e)];
        const double zb = brk[static_cast<std::size_t>(e) + 1];
        const double jac = 0.5 * (zb - za);
        for (int q = 0; q < rule.size(); ++q) {
            g.points.push_back(0.5 * (za + zb) + jac * rule.nodes[q]);
            g.weights[idx++] = jac * rule.weights[q];
        }
    }
    return g;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = a + (b - a) * (static_cast<double>(i) / static_cast<double>(n - 1));
    return xs;
}

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

int TestCase::default_levels(int max_degree) const {
    switch (id) {
        case 1: return 4;
        case 2: return 5;
        case 3: return max_degree >= 5 ? 5 : 4;
        case 4: return 5;
        case 5: return 4;
        case 6: return 4;
        default: return 1;
    }
}

TestCase make_test_case(int id) {
    TestCase tc;
    tc.id = id;
    ProblemSpec& p = tc.problem;
    switch (id) {
        case 1: {
            p.dimension = 1;
            p.epsilon = 0.0;
            p.advection = [](const Point&) { return Point{1.0, 0.0}; };
            p.reaction = constant_field(1.0);
            p.source = [](const Point& x) {
                return (x[0] >= 1.0 / 3.0 && x[0] <= 2.0 / 3.0) ? 5.0 : 0.0;
            };
            p.source_quadrature_boost = 2;
            p.faces[0] = {BoundaryKind::dirichlet, constant_field(0.0)};
            p.faces[1] = {BoundaryKind::neumann, nullptr};
            p.exact = ExactSolution{[](const Point& x) { return test1_exact(x[0]); },
                                    {[](const Point& x) { return test1_exact_dx(x[0]); }, nullptr}};
            p.sigma0 = 1.0;
            tc.default_degree = {3, 3};
            tc.default_elements = {512, 512};
            tc.default_cb = 0.1;
            break;
        }
        case 2: {
            p.dimension = 1;
            p.epsilon = kTest2Eps;
            p.advection = [](const Point&) { return Point{1.0, 0.0}; };
            p.source = constant_field(1.0);
            p.faces[0] = {BoundaryKind::dirichlet, constant_field(0.0)};
            p.faces[1] = {BoundaryKind::dirichlet, constant_field(0.0)};
            p.exact = ExactSolution{[](const Point& x) { return test2_exact(x[0]); },
                                    {[](const Point& x) { return test2_exact_dx(x[0]); }, nullptr}};
            tc.default_degree = {5, 5};
            tc.default_elements = {512, 512};
            tc.default_cb = 0.1;
            break;
        }
        case 3: {
            p.dimension = 2;
            p.epsilon = 1e-8;
            p.advection = [](const Point& x) { return Point{0.0, 1.0 + x[0] * x[0]}; };
            const ScalarField lateral = [](const Point& x) { return 1.0 - x[1]; };
            p.faces[0] = {BoundaryKind::dirichlet, lateral};
            p.faces[1] = {BoundaryKind::dirichlet, lateral};
            p.faces[2] = {BoundaryKind::dirichlet, constant_field(1.0)};
            p.faces[3] = {BoundaryKind::neumann, nullptr};
            tc.default_degree = {5, 5};
            tc.default_elements = {64, 64};
            tc.default_cb = 0.01;
            break;
        }
        case 4: {
            p.dimension = 2;
            p.epsilon = 1e-5;
            p.advection = [](const Point&) { return Point{1.0, 0.0}; };
            p.source = [](const Point& x) {
                const bool inside = x[0] >= 0.25 && x[0] <= 0.75 && x[1] >= 0.25 && x[1] <= 0.75;
                return inside ? 16.0 * (1.0 - 2.0 * x[0]) : 0.0;
            };
            p.source_quadrature_boost = 2;
            for (int f = 0; f < 4; ++f) p.faces[static_cast<std::size_t>(f)] = {BoundaryKind::dirichlet, constant_field(0.0)};
            tc.default_degree = {3, 3};
            tc.default_elements = {64, 64};
            tc.default_cb = 0.01;
            tc.has_indicators = true;
            break;
        }
        case 5: {
            p.dimension = 2;
            p.epsilon = 1e-7;
            p.advection = [](const Point& x) { return Point{-x[1], x[0]}; };
            p.faces[0] = {BoundaryKind::dirichlet, constant_field(0.0)};
            p.faces[1] = {BoundaryKind::dirichlet, constant_field(0.0)};
            // inflow profile; the jump points take the left limit
            p.faces[2] = {BoundaryKind::dirichlet, [](const Point& x) {
                              return (x[0] > 1.0 / 3.0 && x[0] <= 2.0 / 3.0) ? 1.0 : 0.0;
                          }};
            p.faces[3] = {BoundaryKind::neumann, nullptr};
            tc.default_degree = {3, 3};
            tc.default_elements = {64, 64};
            tc.default_cb = 0.01;
            break;
        }
        case 6: {
            p.dimension = 2;
            p.epsilon = 0.0;
            p.advection = [](const Point&) { return Point{0.0, 1.0}; };
            p.source = [](const Point& x) { return test6_source(x[1]); };
            p.source_quadrature_boost = 2;
            p.faces[0] = {BoundaryKind::neumann, nullptr};
            p.faces[1] = {BoundaryKind::neumann, nullptr};
            p.faces[2] = {BoundaryKind::dirichlet, constant_field(0.0)};
            p.faces[3] = {BoundaryKind::neumann, nullptr};
            p.exact = ExactSolution{[](const Point& x) { return test6_exact(x[1]); },
                                    {nullptr, [](const Point& x) { return test6_source(x[1]); }}};
            tc.default_degree = {2, 3};
            tc.default_elements = {8, 256};
            tc.default_cb = 0.01;
            break;
        }
        default:
            throw std::invalid_argument("make_test_case: benchmark id must be 1..6");
    }
    return tc;
}

TensorSpace make_space(const TestCase& tc, std::array<int, 2> degree,
                       std::array<int, 2> elements) {
    std::vector<SplineSpace1D> dirs;
    dirs.push_back(make_uniform_space(0.0, 1.0, elements[0], degree[0]));
    if (tc.dimension() == 2) dirs.push_back(make_uniform_space(0.0, 1.0, elements[1], degree[1]));
    return TensorSpace(std::move(dirs));
}

DiscreteSystem build_system(const ProblemSpec& prob, const TensorSpace& space,
                            const StabConfig& cfg) {
    AssembledSystem base = assemble_galerkin(space, prob);
    Eigen::MatrixXd A = Eigen::MatrixXd(base.matrix);
    Eigen::VectorXd F = base.load;

    switch (cfg.method) {
        case Method::galerkin:
            break;
        case Method::supg:
        case Method::gls: {
            const AssembledSystem add = assemble_supg(space, prob, cfg.method);
            A += Eigen::MatrixXd(add.matrix);
            F += add.load;
            break;
        }
        case Method::mq:
        case Method::mq_isotropic: {
            const MeshHierarchy hier = build_hierarchy(space, cfg.levels);
            const FluctuationOperator fluct(space, hier);
            A += assemble_mq_stabilization(space, hier, fluct, prob, cfg);
            break;
        }
    }
    return apply_dirichlet(space, A, F, prob);
}

DiscreteSolution solve(const ProblemSpec& prob, const TensorSpace& space, const StabConfig& cfg,
                       int test_id) {
    DiscreteSystem sys = build_system(prob, space, cfg);

    Eigen::VectorXd x = linalg::lu_solve(sys.matrix, sys.rhs);
    const double fnorm = sys.rhs.norm();
    if (fnorm > 0.0) {
        for (int iter = 0; iter < 2; ++iter) {
            const Eigen::VectorXd r = sys.rhs - sys.matrix * x;
            if (r.norm() <= 1e-10 * fnorm) break;
            x += linalg::lu_solve(sys.matrix, r);
        }
        const double res = (sys.rhs - sys.matrix * x).norm();
        if (res > 1e-10 * fnorm)
            throw linalg::NumericalError("solve: discrete residual exceeds 1e-10 relative");
    }

    DiscreteSolution sol{space, sys.lift, cfg, test_id};
    for (std::size_t i = 0; i < sys.free_to_full.size(); ++i)
        sol.coefficients[sys.free_to_full[i]] = x[static_cast<Eigen::Index>(i)];
    return sol;
}

ErrorNorms error_norms(const DiscreteSolution& sol, const ExactSolution& exact) {
    const TensorSpace& space = sol.space;
    const int d = space.num_directions();
    const int points = system_quadrature_points(space) + 2;

    double e2 = 0.0, eg2 = 0.0, u2 = 0.0, ug2 = 0.0;
    if (d == 1) {
        const auto& s = space.direction(0);
        const QuadGrid g = quad_grid(s, points);
        const Eigen::MatrixXd B0 = basis_matrix_at(s, g.points, 0);
        const Eigen::MatrixXd B1 = basis_matrix_at(s, g.points, 1);
        const Eigen::VectorXd vals = B0 * sol.coefficients;
        const Eigen::VectorXd ders = B1 * sol.coefficients;
        for (std::size_t k = 0; k < g.points.size(); ++k) {
            const Point x{g.points[k], 0.0};
            const double ue = exact.value(x);
            const double ge = exact.gradient[0] ? exact.gradient[0](x) : 0.0;
            const double w = g.weights[static_cast<Eigen::Index>(k)];
            const double ev = vals[static_cast<Eigen::Index>(k)] - ue;
            const double eg = ders[static_cast<Eigen::Index>(k)] - ge;
            e2 += w * ev * ev;
            eg2 += w * eg * eg;
            u2 += w * ue * ue;
            ug2 += w * ge * ge;
        }
    } else {
        const auto& s1 = space.direction(0);
        const auto& s2 = space.direction(1);
        const QuadGrid g1 = quad_grid(s1, points);
        const QuadGrid g2 = quad_grid(s2, points);
        const Eigen::MatrixXd B10 = basis_matrix_at(s1, g1.points, 0);
        const Eigen::MatrixXd B11 = basis_matrix_at(s1, g1.points, 1);
        const Eigen::MatrixXd B20 = basis_matrix_at(s2, g2.points, 0);
        const Eigen::MatrixXd B21 = basis_matrix_at(s2, g2.points, 1);
        const RowMajorMap U(sol.coefficients.data(), space.dim_of(0), space.dim_of(1));
        const Eigen::MatrixXd V = B10 * U * B20.transpose();
        const Eigen::MatrixXd Vx = B11 * U * B20.transpose();
        const Eigen::MatrixXd Vy = B10 * U * B21.transpose();
        for (std::size_t k1 = 0; k1 < g1.points.size(); ++k1) {
            for (std::size_t k2 = 0; k2 < g2.points.size(); ++k2) {
                const Point x{g1.points[k1], g2.points[k2]};
                const double ue = exact.value(x);
                const double gex = exact.gradient[0] ? exact.gradient[0](x) : 0.0;
                const double gey = exact.gradient[1] ? exact.gradient[1](x) : 0.0;
                const double w = g1.weights[static_cast<Eigen::Index>(k1)] * g2.weights[static_cast<Eigen::Index>(k2)];
                const double ev = V(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) - ue;
                const double ex = Vx(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) - gex;
                const double ey = Vy(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(k2)) - gey;
                e2 += w * ev * ev;
                eg2 += w * (ex * ex + ey * ey);
                u2 += w * ue * ue;
                ug2 += w * (gex * gex + gey * gey);
            }
        }
    }
    ErrorNorms out;
    out.rel_l2 = u2 > 0.0 ? std::sqrt(e2 / u2) : std::sqrt(e2);
    const double denom = u2 + ug2;
    out.rel_h1 = denom > 0.0 ? std::sqrt((e2 + eg2) / denom) : std::sqrt(e2 + eg2);
    return out;
}

LayerIndicators layer_indicators(const DiscreteSolution& sol, int grid_points) {
    if (sol.space.num_directions() != 2)
        throw std::invalid_argument("layer_indicators: requires a 2D solution");
    const auto& s1 = sol.space.direction(0);
    const auto& s2 = sol.space.direction(1);
    const std::vector<double> xs = linspace(s1.a(), s1.b(), grid_points);
    const std::vector<double> ys = linspace(s2.a(), s2.b(), grid_points);
    const Eigen::MatrixXd B1 = basis_matrix_at(s1, xs, 0);
    const Eigen::MatrixXd B2 = basis_matrix_at(s2, ys, 0);
    const RowMajorMap U(sol.coefficients.data(), sol.space.dim_of(0), sol.space.dim_of(1));
    const Eigen::MatrixXd V = B1 * U * B2.transpose();

    double min_mid = 0.0;
    double max_out = -std::numeric_limits<double>::infinity();
    double min_out = std::numeric_limits<double>::infinity();
    bool any_mid = false, any_out = false;
    for (int i = 0; i < grid_points; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        const bool mid = x >= 0.4 && x <= 0.6;
        const bool out = x >= 0.8;
        if (!mid && !out) continue;
        for (int j = 0; j < grid_points; ++j) {
            const double v = V(i, j);
            if (mid) {
                min_mid = any_mid ? std::min(min_mid, v) : v;
                any_mid = true;
            }
            if (out) {
                max_out = std::max(max_out, v);
                min_out = std::min(min_out, v);
                any_out = true;
            }
        }
    }
    LayerIndicators ind;
    ind.min_indicator = any_mid ? -min_mid : 0.0;
    ind.diff_indicator = any_out ? max_out - min_out : 0.0;
    return ind;
}

Eigen::MatrixXd sample_solution(const DiscreteSolution& sol, int grid_points) {
    const int d = sol.space.num_directions();
    if (d == 1) {
        const auto& s = sol.space.direction(0);
        const std::vector<double> xs = linspace(s.a(), s.b(), grid_points);
        const Eigen::MatrixXd B = basis_matrix_at(s, xs, 0);
        const Eigen::VectorXd v = B * sol.coefficients;
        Eigen::MatrixXd out(grid_points, 2);
        for (int i = 0; i < grid_points; ++i) {
            out(i, 0) = xs[static_cast<std::size_t>(i)];
            out(i, 1) = v[i];
        }
        return out;
    }
    const auto& s1 = sol.space.direction(0);
    const auto& s2 = sol.space.direction(1);
    const std::vector<double> xs = linspace(s1.a(), s1.b(), grid_points);
    const std::vector<double> ys = linspace(s2.a(), s2.b(), grid_points);
    const Eigen::MatrixXd B1 = basis_matrix_at(s1, xs, 0);
    const Eigen::MatrixXd B2 = basis_matrix_at(s2, ys, 0);
    const RowMajorMap U(sol.coefficients.data(), sol.space.dim_of(0), sol.space.dim_of(1));
    const Eigen::MatrixXd V = B1 * U * B2.transpose();
    Eigen::MatrixXd out(grid_points * grid_points, 3);
    int row = 0;
    for (int i = 0; i < grid_points; ++i) {
        for (int j = 0; j < grid_points; ++j, ++row) {
            out(row, 0) = xs[static_cast<std::size_t>(i)];
            out(row, 1) = ys[static_cast<std::size_t>(j)];
            out(row, 2) = V(i, j);
        }
    }
    return out;
}

std::array<int, 2> mesh_elements(const TestCase& tc, int mesh) {
    if (tc.dimension() == 1) return {mesh, mesh};
    if (tc.id == 6) return {tc.default_elements[0], mesh};
    return {mesh, mesh};
}

BenchmarkReport run_case(const TestCase& tc, Method method, std::array<int, 2> degree,
                         std::array<int, 2> elements, int levels, double cb,
                         int condition_dim_limit, std::optional<DiscreteSolution>* solution_out) {
    const auto start = Clock::now();
    const TensorSpace space = make_space(tc, degree, elements);
    StabConfig cfg;
    cfg.method = method;
    cfg.levels = levels;
    cfg.cb = cb;

    BenchmarkReport rep;
    rep.test = tc.id;
    rep.method = method;
    rep.degree = degree;
    rep.elements = elements;
    rep.levels = levels;
    rep.cb = cb;
    rep.dofs = space.dim();

    DiscreteSolution sol = solve(tc.problem, space, cfg, tc.id);
    if (tc.problem.exact) {
        const ErrorNorms err = error_norms(sol, *tc.problem.exact);
        rep.rel_l2 = err.rel_l2;
        rep.rel_h1 = err.rel_h1;
    }
    if (tc.has_indicators) {
        const LayerIndicators ind = layer_indicators(sol);
        rep.min_indicator = ind.min_indicator;
        rep.diff_indicator = ind.diff_indicator;
    }
    if (condition_dim_limit > 0 && space.dim() <= condition_dim_limit) {
        const DiscreteSystem sys = build_system(tc.problem, space, cfg);
        if (sys.matrix.rows() <= condition_dim_limit)
            rep.condition = linalg::condition_number_2(sys.matrix);
    }
    rep.seconds = elapsed_seconds(start);
    if (solution_out) solution_out->emplace(std::move(sol));
    return rep;
}

std::vector<BenchmarkReport> convergence_sweep(const TestCase& tc, Method method,
                                               std::array<int, 2> degree,
                                               const std::vector<int>& meshes, int levels,
                                               double cb) {
    if (!tc.problem.exact)
        throw std::invalid_argument("convergence_sweep: benchmark has no exact solution");
    for (std::size_t i = 1; i < meshes.size(); ++i)
        if (meshes[i] != 2 * meshes[i - 1])
            throw std::invalid_argument("convergence_sweep: meshes must form a dyadic family");
    std::vector<BenchmarkReport> out;
    out.reserve(meshes.size());
    for (const int m : meshes) {
        BenchmarkReport rep = run_case(tc, method, degree, mesh_elements(tc, m), levels, cb,
                                       /*condition_dim_limit=*/0);
        if (!out.empty() && out.back().rel_l2 && rep.rel_l2 && *rep.rel_l2 > 0.0) {
            rep.rate_l2 = std::log2(*out.back().rel_l2 / *rep.rel_l2);
            rep.rate_h1 = std::log2(*out.back().rel_h1 / *rep.rel_h1);
        }
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<BenchmarkReport> condition_sweep(const TestCase& tc, std::array<int, 2> degree,
                                             const std::vector<int>& meshes,
                                             const std::vector<Method>& methods,
                                             int levels, double cb, int condition_dim_limit) {
    std::vector<BenchmarkReport> out;
    for (const Method m : methods) {
        for (const int mesh : meshes) {
            const auto start = Clock::now();
            const std::array<int, 2> elements = mesh_elements(tc, mesh);
            const TensorSpace space = make_space(tc, degree, elements);
            StabConfig cfg;
            cfg.method = m;
            cfg.levels = levels;
            cfg.cb = cb;

            BenchmarkReport rep;
            rep.test = tc.id;
            rep.method = m;
            rep.degree = degree;
            rep.elements = elements;
            rep.levels = levels;
            rep.cb = cb;
            rep.dofs = space.dim();
            if (space.dim() <= condition_dim_limit) {
                const DiscreteSystem sys = build_system(tc.problem, space, cfg);
                if (sys.matrix.rows() <= condition_dim_limit)
                    rep.condition = linalg::condition_number_2(sys.matrix);
            }
            rep.seconds = elapsed_seconds(start);
            out.push_back(std::move(rep));
        }
    }
    return out;
}

}  // namespace mqstab::bench
