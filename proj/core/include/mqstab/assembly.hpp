#pragma once

#include "mqstab/hierarchy.hpp"
#include "mqstab/quadrature.hpp"
#include "mqstab/quasi_interpolant.hpp"
#include "mqstab/spline.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace mqstab {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Point = std::array<double, 2>;
using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

enum class Method { galerkin, supg, gls, mq, mq_isotropic };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& name);

enum class BoundaryKind { dirichlet, neumann };

/// Condition on one box face. Faces are indexed 2*direction + side with
/// side 0 at the lower coordinate; the lower face index wins at corners.
struct FaceCondition {
    BoundaryKind kind = BoundaryKind::dirichlet;
    ScalarField value;  ///< Dirichlet data; unused (and may be null) for Neumann
};

struct ExactSolution {
    ScalarField value;
    std::array<ScalarField, 2> gradient;
};

/// Coefficients and data of -eps*Lap(u) + b.grad(u) + c*u = f on a box.
/// Null std::function fields mean identically zero.
struct ProblemSpec {
    int dimension = 1;
    double epsilon = 0.0;
    VectorField advection;
    ScalarField reaction;
    ScalarField advection_divergence;  ///< div b, used by the sigma = c - div(b)/2 weight
    ScalarField source;
    std::array<FaceCondition, 4> faces{};
    std::optional<ExactSolution> exact;
    double sigma0 = 0.0;              ///< recorded coercivity bound when known
    int source_quadrature_boost = 0;  ///< extra Gauss points for rough sources
};

/// Stabilization configuration. tau_h = cb * h with h the max element
/// length over all directions (h_def overrides when positive).
struct StabConfig {
    Method method = Method::galerkin;
    int levels = 1;
    double cb = 0.0;
    double h_def = 0.0;
};

/// Constrained linear system together with the maps back to the full basis.
struct DiscreteSystem {
    Eigen::MatrixXd matrix;          ///< free x free
    Eigen::VectorXd rhs;
    std::vector<int> free_to_full;
    std::vector<int> full_to_free;   ///< -1 at constrained dofs
    Eigen::VectorXd lift;            ///< full-length; Dirichlet data at constrained dofs
};

struct AssembledSystem {
    SpMat matrix;
    Eigen::VectorXd load;
};

/// Gauss points per direction used for stiffness/advection/mass terms:
/// max degree + 1, exact for products of two basis functions.
int system_quadrature_points(const TensorSpace& space);

/// A_ij = eps*(grad Nj, grad Ni) + (b.grad Nj, Ni) + (c Nj, Ni); F_i = (f, Ni).
/// The load uses source_quadrature_boost extra points per direction.
AssembledSystem assemble_galerkin(const TensorSpace& space, const ProblemSpec& prob);

/// D_ij = ((b.grad Nj), (b.grad Ni)); bitwise symmetric.
SpMat assemble_streamline_matrix(const TensorSpace& space, const ProblemSpec& prob);

/// D_ij = (grad Nj, grad Ni); bitwise symmetric.
SpMat assemble_gradient_matrix(const TensorSpace& space);

/// M_ij = (w Nj, Ni); bitwise symmetric.
SpMat assemble_weighted_mass(const TensorSpace& space, const ScalarField& weight,
                             int extra_points = 0);

/// F_i = (f, Ni) at elevated order when extra_points > 0.
Eigen::VectorXd assemble_load(const TensorSpace& space, const ScalarField& f,
                              int extra_points = 0);

/// Multilevel projection stabilization S = tau_h * sum_k c_k F_k^T D F_k
/// with F_k = Id - Pi_k and D the streamline matrix (method mq) or the
/// full-gradient stiffness (method mq_isotropic). Symmetric by construction
/// and positive semidefinite.
Eigen::MatrixXd assemble_mq_stabilization(const TensorSpace& space, const MeshHierarchy& hier,
                                          const FluctuationOperator& fluct,
                                          const ProblemSpec& prob, const StabConfig& cfg);

/// Residual-based addends sum_K tau_K (L Nj, T Ni)_K and sum_K tau_K (f, T Ni)_K
/// with L v = -eps*Lap v + b.grad v + c v, T v = b.grad v for SUPG and
/// T v = +eps*Lap v + b.grad v + c v for GLS. tau_K uses the coth rule with
/// |b| at the element centroid; tau_K = h_K/(2|b|_K) when eps = 0 and 0 when
/// |b|_K = 0.
AssembledSystem assemble_supg(const TensorSpace& space, const ProblemSpec& prob, Method method);

/// The elementwise coth upwind function coth(pe) - 1/pe.
double upwind_function(double peclet);

/// Fix Dirichlet coefficients by collocating the face data at the boundary
/// Greville abscissae, extract the free block and fold the lift into the rhs.
DiscreteSystem apply_dirichlet(const TensorSpace& space, const Eigen::MatrixXd& A_full,
                               const Eigen::VectorXd& F_full, const ProblemSpec& prob);

}  // namespace mqstab
