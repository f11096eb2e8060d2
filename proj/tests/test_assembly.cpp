#include "mqstab/assembly.hpp"

#include "mqstab/linalg.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

using namespace mqstab;

namespace {

ProblemSpec constant_problem(int dim, double eps, Point b, double c) {
    ProblemSpec p;
    p.dimension = dim;
    p.epsilon = eps;
    p.advection = [b](const Point&) { return b; };
    if (c != 0.0) p.reaction = [c](const Point&) { return c; };
    return p;
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
}

// Pointwise-quadrature oracle for v^T S v: evaluates the coarse spline of
// each level directly instead of going through the prolongation congruence.
double stabilization_oracle_1d(const SplineSpace1D& fine, const MeshHierarchy& hier,
                               const FluctuationOperator& fluct, const Eigen::VectorXd& v,
                               double tau, int levels) {
    const GaussRule rule = quadrature_rule(fine.degree() + 7);
    const auto& brk = fine.breakpoints();
    double total = 0.0;
    for (int k = 0; k < levels; ++k) {
        const SplineSpace1D& coarse = hier.levels[static_cast<std::size_t>(k)].spaces[0];
        const Eigen::VectorXd cv = fluct.level(k).sampling[0] * v;
        double level_sum = 0.0;
        for (int e = 0; e < fine.num_elements(); ++e) {
            const double za = brk[static_cast<std::size_t>(e)];
            const double zb = brk[static_cast<std::size_t>(e) + 1];
            const double jac = 0.5 * (zb - za);
            for (int q = 0; q < rule.size(); ++q) {
                const double x = 0.5 * (za + zb) + jac * rule.nodes[q];
                const double diff = fine.eval(v, x, 1) - coarse.eval(cv, x, 1);
                level_sum += jac * rule.weights[q] * diff * diff;
            }
        }
        total += hier.levels[static_cast<std::size_t>(k)].weight * level_sum;
    }
    return tau * total;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules") {
    const GaussRule r1 = quadrature_rule(1);
    CHECK(r1.nodes[0] == doctest::Approx(0.0));
    CHECK(r1.weights[0] == doctest::Approx(2.0));

    const GaussRule r2 = quadrature_rule(2);
    CHECK(r2.nodes[0] == doctest::Approx(-0.5773502692).epsilon(1e-9));
    CHECK(r2.nodes[1] == doctest::Approx(0.5773502692).epsilon(1e-9));
    CHECK(r2.weights[0] == doctest::Approx(1.0));
    CHECK(r2.weights[1] == doctest::Approx(1.0));

    // degree-5 exactness with 3 points: int_{-1}^{1} x^4 dx = 0.4
    const GaussRule r3 = quadrature_rule(3);
    double integral = 0.0;
    for (int q = 0; q < 3; ++q) integral += r3.weights[q] * std::pow(r3.nodes[q], 4);
    CHECK(std::abs(integral - 0.4) <= 5e-15);

    CHECK_THROWS_AS(quadrature_rule(0), std::invalid_argument);
}

TEST_CASE("Galerkin single-element hat matrices") {
    const TensorSpace space({make_uniform_space(0.0, 1.0, 1, 1)});

    const Eigen::MatrixXd K = Eigen::MatrixXd(
        assemble_galerkin(space, constant_problem(1, 1.0, {0, 0}, 0.0)).matrix);
    CHECK(K(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(K(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(K(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(K(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

    const Eigen::MatrixXd C = Eigen::MatrixXd(
        assemble_galerkin(space, constant_problem(1, 0.0, {1, 0}, 0.0)).matrix);
    CHECK(C(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(C(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(C(1, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(C(1, 1) == doctest::Approx(0.5).epsilon(1e-14));

    const Eigen::MatrixXd M = Eigen::MatrixXd(
        assemble_galerkin(space, constant_problem(1, 0.0, {0, 0}, 1.0)).matrix);
    CHECK(M(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(M(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(M(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("quadrature exactness against single-element symbolic integrals") {
    // Bernstein basis on one element, p = 2: exact mass and stiffness
    const TensorSpace space({make_uniform_space(0.0, 1.0, 1, 2)});
    const Eigen::MatrixXd M = Eigen::MatrixXd(assemble_weighted_mass(space, nullptr));
    const double mass[3][3] = {{1.0 / 5.0, 1.0 / 10.0, 1.0 / 30.0},
                               {1.0 / 10.0, 2.0 / 15.0, 1.0 / 10.0},
                               {1.0 / 30.0, 1.0 / 10.0, 1.0 / 5.0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(M(i, j) - mass[i][j]) <= 1e-13);

    const Eigen::MatrixXd K = Eigen::MatrixXd(assemble_gradient_matrix(space));
    const double stiff[3][3] = {{4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0},
                                {-2.0 / 3.0, 4.0 / 3.0, -2.0 / 3.0},
                                {-2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(K(i, j) - stiff[i][j]) <= 1e-13);
}

TEST_CASE("streamline matrix: hat stiffness, zero field, exact symmetry") {
    const TensorSpace space({make_uniform_space(0.0, 1.0, 1, 1)});
    const Eigen::MatrixXd D = Eigen::MatrixXd(
        assemble_streamline_matrix(space, constant_problem(1, 0.0, {1, 0}, 0.0)));
    CHECK(D(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(D(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));

    ProblemSpec none;
    none.dimension = 1;
    const Eigen::MatrixXd Z = Eigen::MatrixXd(assemble_streamline_matrix(space, none));
    CHECK(Z.lpNorm<Eigen::Infinity>() == 0.0);

    // variable field in 2D, still bitwise symmetric
    ProblemSpec rot;
    rot.dimension = 2;
    rot.advection = [](const Point& x) { return Point{-x[1], x[0]}; };
    const TensorSpace sq({make_uniform_space(0.0, 1.0, 4, 2), make_uniform_space(0.0, 1.0, 4, 2)});
    const Eigen::MatrixXd Dr = Eigen::MatrixXd(assemble_streamline_matrix(sq, rot));
    CHECK((Dr - Dr.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("MQ stabilization: annihilation, zero scaling, symmetry, PSD") {
    const TensorSpace space({make_uniform_space(0.0, 1.0, 8, 2), make_uniform_space(0.0, 1.0, 8, 2)});
    const MeshHierarchy hier = build_hierarchy(space, 2);
    const FluctuationOperator fluct(space, hier);
    const ProblemSpec prob = constant_problem(2, 0.0, {1.0, 0.5}, 0.0);

    StabConfig cfg;
    cfg.method = Method::mq;
    cfg.levels = 2;
    cfg.cb = 0.1;
    const Eigen::MatrixXd S = assemble_mq_stabilization(space, hier, fluct, prob, cfg);

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.dim());
    CHECK(std::abs(ones.dot(S * ones)) <= 1e-12 * S.lpNorm<Eigen::Infinity>());
    CHECK((S - S.transpose()).lpNorm<Eigen::Infinity>() == 0.0);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) >= -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());

    StabConfig zero = cfg;
    zero.cb = 0.0;
    CHECK(assemble_mq_stabilization(space, hier, fluct, prob, zero).lpNorm<Eigen::Infinity>() == 0.0);

    StabConfig bad = cfg;
    bad.method = Method::galerkin;
    CHECK_THROWS_AS(assemble_mq_stabilization(space, hier, fluct, prob, bad), std::invalid_argument);
    StabConfig deep = cfg;
    deep.levels = 9;
    CHECK_THROWS_AS(assemble_mq_stabilization(space, hier, fluct, prob, deep), std::invalid_argument);
}

TEST_CASE("MQ stabilization equals the pointwise-quadrature oracle (1D, p=2, ne=8, L=1)") {
    const SplineSpace1D fine = make_uniform_space(0.0, 1.0, 8, 2);
    const TensorSpace space({fine});
    const MeshHierarchy hier = build_hierarchy(space, 1);
    const FluctuationOperator fluct(space, hier);
    const ProblemSpec prob = constant_problem(1, 0.0, {1, 0}, 0.0);

    StabConfig cfg;
    cfg.method = Method::mq;
    cfg.levels = 1;
    cfg.cb = 0.1;
    const Eigen::MatrixXd S = assemble_mq_stabilization(space, hier, fluct, prob, cfg);
    const double tau = cfg.cb * fine.max_mesh_size();

    for (unsigned seed = 0; seed < 5; ++seed) {
        const Eigen::VectorXd v = random_vector(space.dim(), 300 + seed);
        const double direct = v.dot(S * v);
        const double oracle = stabilization_oracle_1d(fine, hier, fluct, v, tau, 1);
        CHECK(std::abs(direct - oracle) <= 1e-10 * std::abs(oracle));
    }
}

TEST_CASE("upwind function and SUPG tau") {
    CHECK(upwind_function(1.0) == doctest::Approx(0.3130352855).epsilon(1e-9));
    CHECK(upwind_function(1e9) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(upwind_function(1e-6) == doctest::Approx(1e-6 / 3.0).epsilon(1e-6));

    // eps = 0, b = 1, h = 1/8: the addend reduces to tau * streamline with tau = 1/16
    const TensorSpace space({make_uniform_space(0.0, 1.0, 8, 2)});
    const ProblemSpec prob = constant_problem(1, 0.0, {1, 0}, 0.0);
    const Eigen::MatrixXd A = Eigen::MatrixXd(assemble_supg(space, prob, Method::supg).matrix);
    const Eigen::MatrixXd D = Eigen::MatrixXd(assemble_streamline_matrix(space, prob));
    CHECK((A - D / 16.0).lpNorm<Eigen::Infinity>() <= 1e-13 * D.lpNorm<Eigen::Infinity>());

    // diffusion-dominated limit: coth(pe) - 1/pe -> 0, so tau_K -> 0
    const double h = 1.0 / 8.0;
    double prev_tau = std::numeric_limits<double>::infinity();
    for (const double eps : {1e3, 1e6, 1e9, 1e12}) {
        const double tau = h / 2.0 * upwind_function(h / (2.0 * eps));
        CHECK(tau < prev_tau);
        prev_tau = tau;
    }
    CHECK(prev_tau <= 1e-12 * h);

    // zero advection field: tau = 0 on every element
    ProblemSpec still;
    still.dimension = 1;
    still.epsilon = 1.0;
    const Eigen::MatrixXd A3 = Eigen::MatrixXd(assemble_supg(space, still, Method::supg).matrix);
    CHECK(A3.lpNorm<Eigen::Infinity>() == 0.0);

    CHECK_THROWS_AS(assemble_supg(space, prob, Method::mq), std::invalid_argument);
}

TEST_CASE("gls differs from supg through the test operator") {
    const TensorSpace space({make_uniform_space(0.0, 1.0, 8, 2)});
    const ProblemSpec prob = constant_problem(1, 0.0, {1, 0}, 1.0);  // reaction makes them differ
    const Eigen::MatrixXd As = Eigen::MatrixXd(assemble_supg(space, prob, Method::supg).matrix);
    const Eigen::MatrixXd Ag = Eigen::MatrixXd(assemble_supg(space, prob, Method::gls).matrix);
    CHECK((As - Ag).lpNorm<Eigen::Infinity>() > 1e-6);
}

TEST_CASE("apply_dirichlet: dimensions, lifts, Greville collocation") {
    // homogeneous 1D problem: two boundary functions removed
    const TensorSpace line({make_uniform_space(0.0, 1.0, 8, 3)});
    ProblemSpec p1 = constant_problem(1, 1.0, {0, 0}, 0.0);
    p1.faces[0] = {BoundaryKind::dirichlet, [](const Point&) { return 0.0; }};
    p1.faces[1] = {BoundaryKind::dirichlet, [](const Point&) { return 0.0; }};
    const auto sys1 = apply_dirichlet(line, Eigen::MatrixXd::Identity(line.dim(), line.dim()),
                                      Eigen::VectorXd::Zero(line.dim()), p1);
    CHECK(sys1.matrix.rows() == line.dim() - 2);
    CHECK(sys1.lift.lpNorm<Eigen::Infinity>() == 0.0);

    // g == 1 on all faces of a square: every boundary coefficient lifts to 1
    const TensorSpace sq({make_uniform_space(0.0, 1.0, 4, 2), make_uniform_space(0.0, 1.0, 4, 2)});
    ProblemSpec p2 = constant_problem(2, 1.0, {0, 0}, 0.0);
    for (int f = 0; f < 4; ++f)
        p2.faces[static_cast<std::size_t>(f)] = {BoundaryKind::dirichlet, [](const Point&) { return 1.0; }};
    const auto sys2 = apply_dirichlet(sq, Eigen::MatrixXd::Identity(sq.dim(), sq.dim()),
                                      Eigen::VectorXd::Zero(sq.dim()), p2);
    const int n1 = sq.dim_of(0), n2 = sq.dim_of(1);
    CHECK(sys2.matrix.rows() == (n1 - 2) * (n2 - 2));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const bool boundary = i == 0 || i == n1 - 1 || j == 0 || j == n2 - 1;
            CHECK(sys2.lift[i * n2 + j] == (boundary ? 1.0 : 0.0));
        }

    // lateral faces carrying 1 - y collocate to 1 - greville_y
    ProblemSpec p3 = constant_problem(2, 1.0, {0, 0}, 0.0);
    p3.faces[0] = {BoundaryKind::dirichlet, [](const Point& x) { return 1.0 - x[1]; }};
    p3.faces[1] = {BoundaryKind::dirichlet, [](const Point& x) { return 1.0 - x[1]; }};
    p3.faces[2] = {BoundaryKind::dirichlet, [](const Point&) { return 1.0; }};
    p3.faces[3] = {BoundaryKind::neumann, nullptr};
    const auto sys3 = apply_dirichlet(sq, Eigen::MatrixXd::Identity(sq.dim(), sq.dim()),
                                      Eigen::VectorXd::Zero(sq.dim()), p3);
    const Eigen::VectorXd gy = greville_abscissae(sq.direction(1));
    for (int j = 0; j < n2; ++j) {
        CHECK(sys3.lift[0 * n2 + j] == doctest::Approx(1.0 - gy[j]).epsilon(1e-14));
        CHECK(sys3.lift[(n1 - 1) * n2 + j] == doctest::Approx(1.0 - gy[j]).epsilon(1e-14));
    }
    // interior bottom dofs take the bottom value; corners went to the lateral faces
    for (int i = 1; i < n1 - 1; ++i) CHECK(sys3.lift[i * n2 + 0] == 1.0);
    // top face free: dofs (i, n2-1) stay for interior i
    CHECK(sys3.matrix.rows() == (n1 - 2) * (n2 - 1));

    ProblemSpec broken = p1;
    broken.faces[0].value = nullptr;
    CHECK_THROWS_AS(apply_dirichlet(line, Eigen::MatrixXd::Identity(line.dim(), line.dim()),
                                    Eigen::VectorXd::Zero(line.dim()), broken),
                    std::invalid_argument);
}

TEST_CASE("coercivity identity on a reaction-advection configuration") {
    // constant b, homogeneous Dirichlet, constant c: v'Av = eps|v|_1^2 + c||v||^2 + v'Sv
    const TensorSpace space({make_uniform_space(0.0, 1.0, 16, 3)});
    ProblemSpec prob = constant_problem(1, 0.01, {1, 0}, 2.0);
    prob.faces[0] = {BoundaryKind::dirichlet, [](const Point&) { return 0.0; }};
    prob.faces[1] = {BoundaryKind::dirichlet, [](const Point&) { return 0.0; }};

    const MeshHierarchy hier = build_hierarchy(space, 2);
    const FluctuationOperator fluct(space, hier);
    StabConfig cfg;
    cfg.method = Method::mq;
    cfg.levels = 2;
    cfg.cb = 0.1;

    const Eigen::MatrixXd A =
        Eigen::MatrixXd(assemble_galerkin(space, prob).matrix) +
        assemble_mq_stabilization(space, hier, fluct, prob, cfg);
    const Eigen::MatrixXd K = Eigen::MatrixXd(assemble_gradient_matrix(space));
    const Eigen::MatrixXd Msig = Eigen::MatrixXd(
        assemble_weighted_mass(space, [&prob](const Point& x) { return prob.reaction(x); }));
    const Eigen::MatrixXd S = assemble_mq_stabilization(space, hier, fluct, prob, cfg);

    for (unsigned seed = 0; seed < 10; ++seed) {
        Eigen::VectorXd v = random_vector(space.dim(), 500 + seed);
        v[0] = 0.0;
        v[v.size() - 1] = 0.0;  // free coefficients only
        const double lhs = v.dot(A * v);
        const double rhs = prob.epsilon * v.dot(K * v) + v.dot(Msig * v) + v.dot(S * v);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}
