#pragma once

#include "mqstab/assembly.hpp"
#include "mqstab/spline.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace mqstab::bench {

/// One of the six benchmark problems, with its configuration defaults.
struct TestCase {
    int id = 0;
    ProblemSpec problem;
    std::array<int, 2> default_degree{3, 3};
    std::array<int, 2> default_elements{64, 64};
    double default_cb = 0.01;
    bool has_indicators = false;

    int dimension() const noexcept { return problem.dimension; }
    int default_levels(int max_degree) const;
};

/// Benchmarks 1..6; throws std::invalid_argument otherwise.
TestCase make_test_case(int id);

/// Tensor space for a case; elements[1]/degree[1] are ignored in 1D.
TensorSpace make_space(const TestCase& tc, std::array<int, 2> degree,
                       std::array<int, 2> elements);

struct DiscreteSolution {
    TensorSpace space;
    Eigen::VectorXd coefficients;  ///< full basis, lift merged
    StabConfig config;
    int test_id = 0;
};

/// Assemble the method's system and apply the boundary conditions.
DiscreteSystem build_system(const ProblemSpec& prob, const TensorSpace& space,
                            const StabConfig& cfg);

/// Assemble, constrain, solve and merge the Dirichlet lift. The discrete
/// residual is driven below 1e-10 relative to the load.
DiscreteSolution solve(const ProblemSpec& prob, const TensorSpace& space, const StabConfig& cfg,
                       int test_id = 0);

struct ErrorNorms {
    double rel_l2 = 0.0;
    double rel_h1 = 0.0;
};

/// Relative L2 and full H1 errors against an exact solution, integrated with
/// max_degree + 3 Gauss points per direction.
ErrorNorms error_norms(const DiscreteSolution& sol, const ExactSolution& exact);

struct LayerIndicators {
    double min_indicator = 0.0;   ///< -min over 0.4 <= x <= 0.6 (all y)
    double diff_indicator = 0.0;  ///< max - min over x >= 0.8 (all y)
};

/// Undershoot and outflow-variation indicators sampled on an inclusive
/// uniform grid over the unit square.
LayerIndicators layer_indicators(const DiscreteSolution& sol, int grid_points = 256);

/// Uniform samples for plotting: columns (x, u) in 1D, (x, y, u) in 2D.
Eigen::MatrixXd sample_solution(const DiscreteSolution& sol, int grid_points);

struct BenchmarkReport {
    int test = 0;
    Method method = Method::galerkin;
    std::array<int, 2> degree{0, 0};
    std::array<int, 2> elements{0, 0};
    int levels = 0;
    double cb = 0.0;
    int dofs = 0;
    double seconds = 0.0;
    std::optional<double> rel_l2, rel_h1;
    std::optional<double> rate_l2, rate_h1;
    std::optional<double> min_indicator, diff_indicator;
    std::optional<double> condition;
};

/// Solve one configuration and collect every metric the case supports.
/// The condition number is computed only when the free system is at most
/// condition_dim_limit (dense SVD bound); pass 0 to skip it.
BenchmarkReport run_case(const TestCase& tc, Method method, std::array<int, 2> degree,
                         std::array<int, 2> elements, int levels, double cb,
                         int condition_dim_limit = 1000,
                         std::optional<DiscreteSolution>* solution_out = nullptr);

/// Per-mesh errors with successive rates log2(e_n / e_2n). The mesh list
/// refines the y-direction for benchmark 6 and both directions otherwise.
std::vector<BenchmarkReport> convergence_sweep(const TestCase& tc, Method method,
                                               std::array<int, 2> degree,
                                               const std::vector<int>& meshes, int levels,
                                               double cb);

/// Spectral condition numbers of the constrained system per mesh and method.
/// Systems above the dense-SVD bound get an empty condition field.
std::vector<BenchmarkReport> condition_sweep(const TestCase& tc, std::array<int, 2> degree,
                                             const std::vector<int>& meshes,
                                             const std::vector<Method>& methods,
                                             int levels, double cb,
                                             int condition_dim_limit = 6000);

/// Elements per direction for one entry of a convergence/condition mesh list.
std::array<int, 2> mesh_elements(const TestCase& tc, int mesh);

}  // namespace mqstab::bench
