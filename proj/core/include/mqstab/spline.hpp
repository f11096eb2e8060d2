#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace mqstab {

/// Open knot vector of degree p: the first and last value are repeated
/// exactly p+1 times and every interior knot is simple, so the spline
/// space has maximal C^{p-1} smoothness across breakpoints.
class KnotVector {
public:
    KnotVector(std::vector<double> values, int degree);

    int degree() const noexcept { return degree_; }
    int size() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const noexcept { return values_; }

    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

private:
    std::vector<double> values_;
    int degree_;
};

/// Result of evaluating the nonzero B-spline basis functions at a point.
/// values(r, j) holds the r-th derivative of basis function span - p + j,
/// j = 0..p. Row 0 sums to one (partition of unity).
struct BasisValues {
    int span = 0;               ///< global index of the last nonzero basis function
    Eigen::MatrixXd values;     ///< (deriv_order+1) x (p+1)
};

/// Univariate spline space spanned by the degree-p B-splines on an open
/// knot vector. Immutable; all queries are const and thread-safe.
class SplineSpace1D {
public:
    explicit SplineSpace1D(KnotVector knots);

    int degree() const noexcept { return knots_.degree(); }
    int dim() const noexcept { return dim_; }
    int num_elements() const noexcept { return static_cast<int>(breaks_.size()) - 1; }

    /// Distinct element boundaries, strictly increasing, covering [a, b].
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }

    double a() const { return breaks_.front(); }
    double b() const { return breaks_.back(); }

    const KnotVector& knots() const noexcept { return knots_; }

    /// Largest element length.
    double max_mesh_size() const;

    /// Index e of the element [z_e, z_{e+1}) containing x; the last element
    /// is closed at b. Throws std::domain_error for x outside [a, b].
    int find_element(double x) const;

    /// Knot span index of the element: basis functions span-p .. span are
    /// the ones supported there.
    int span_of_element(int element) const { return element_spans_[static_cast<std::size_t>(element)]; }

    /// Signed value of a single basis function i at x (zero outside its support).
    double basis_value(int i, double x, int deriv = 0) const;

    /// Evaluate the spline with the given coefficient vector at x.
    double eval(const Eigen::VectorXd& coeffs, double x, int deriv = 0) const;

private:
    KnotVector knots_;
    std::vector<double> breaks_;
    std::vector<int> element_spans_;
    int dim_;
};

/// Open uniform space on [a, b] with n_elements equal elements. Interior
/// knots are computed as a + (b-a)*(i/n) so that dyadic coarsening keeps
/// bit-identical knot values.
SplineSpace1D make_uniform_space(double a, double b, int n_elements, int degree);

/// Nonzero basis functions and derivatives up to deriv_order at x.
/// Requires deriv_order <= degree and x in [a, b].
BasisValues eval_basis(const SplineSpace1D& space, double x, int deriv_order);

/// Greville abscissae t*_i = (t_{i+1} + ... + t_{i+p}) / p, one per basis
/// function; nondecreasing, first = a, last = b.
Eigen::VectorXd greville_abscissae(const SplineSpace1D& space);

/// Knot-insertion matrix P (fine.dim x coarse.dim): a coarse spline with
/// coefficients c is pointwise identical to the fine spline with
/// coefficients P*c. Rows are nonnegative and sum to one. Knot comparison
/// is exact; throws std::invalid_argument when the coarse knots are not a
/// subsequence of the fine knots or degrees differ.
Eigen::MatrixXd prolongation_matrix(const SplineSpace1D& coarse, const SplineSpace1D& fine);

/// Tensor product of univariate spline spaces on an axis-aligned box.
/// Coefficients are flattened row-major: the last direction varies fastest.
class TensorSpace {
public:
    explicit TensorSpace(std::vector<SplineSpace1D> directions);

    int num_directions() const noexcept { return static_cast<int>(directions_.size()); }
    const SplineSpace1D& direction(int d) const { return directions_[static_cast<std::size_t>(d)]; }

    int dim() const noexcept { return dim_; }
    int dim_of(int d) const { return directions_[static_cast<std::size_t>(d)].dim(); }

    const std::vector<int>& dims() const noexcept { return dims_; }

    int global_index(std::span<const int> multi) const;

    /// Evaluate the tensor spline at a point; derivs gives the requested
    /// derivative order per direction (empty = values only).
    double eval(const Eigen::VectorXd& coeffs, std::span<const double> x,
                std::span<const int> derivs = {}) const;

private:
    std::vector<SplineSpace1D> directions_;
    std::vector<int> dims_;
    int dim_;
};

}  // namespace mqstab
