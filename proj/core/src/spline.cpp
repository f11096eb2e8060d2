#include "mqstab/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mqstab {

namespace {

// Nonzero basis functions and derivatives at x in the given knot span,
// via the triangular recurrence of de Boor (values table ndu, then the
// alternating-sum derivative pass). out is (nderiv+1) x (p+1).
void ders_basis_funs(const std::vector<double>& t, int span, double x, int p, int nderiv,
                     Eigen::MatrixXd& out) {
    const int n = std::min(nderiv, p);
    out.setZero(nderiv + 1, p + 1);

    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            // lower triangle: knot differences
            ndu(j, r) = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) out(0, j) = ndu(j, p);

    if (n == 0) return;

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out(k, r) = d;
            std::swap(s1, s2);
        }
    }
    // multiply by p! / (p-k)!
    double r = static_cast<double>(p);
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j <= p; ++j) out(k, j) *= r;
        r *= static_cast<double>(p - k);
    }
}

}  // namespace

KnotVector::KnotVector(std::vector<double> values, int degree)
    : values_(std::move(values)), degree_(degree) {
    if (degree_ < 1) throw std::invalid_argument("KnotVector: degree must be >= 1");
    const int m = static_cast<int>(values_.size());
    if (m < 2 * (degree_ + 1)) throw std::invalid_argument("KnotVector: too few knots");
    for (int i = 1; i < m; ++i) {
        if (values_[static_cast<std::size_t>(i)] < values_[static_cast<std::size_t>(i - 1)])
            throw std::invalid_argument("KnotVector: values must be nondecreasing");
    }
    // open: endpoint multiplicity exactly degree+1
    const double a = values_.front();
    const double b = values_.back();
    if (a == b) throw std::invalid_argument("KnotVector: degenerate interval");
    int mult_a = 0;
    while (mult_a < m && values_[static_cast<std::size_t>(mult_a)] == a) ++mult_a;
    int mult_b = 0;
    while (mult_b < m && values_[static_cast<std::size_t>(m - 1 - mult_b)] == b) ++mult_b;
    if (mult_a != degree_ + 1 || mult_b != degree_ + 1)
        throw std::invalid_argument("KnotVector: endpoint multiplicity must be degree+1");
    // simple interior knots
    for (int i = degree_ + 2; i < m - degree_ - 1; ++i) {
        if (values_[static_cast<std::size_t>(i)] == values_[static_cast<std::size_t>(i - 1)])
            throw std::invalid_argument("KnotVector: interior knots must be simple");
    }
}

SplineSpace1D::SplineSpace1D(KnotVector knots) : knots_(std::move(knots)) {
    dim_ = knots_.size() - knots_.degree() - 1;
    if (dim_ < knots_.degree() + 1) throw std::invalid_argument("SplineSpace1D: dimension too small");
    breaks_.clear();
    breaks_.push_back(knots_[0]);
    for (int i = 1; i < knots_.size(); ++i) {
        if (knots_[i] != knots_[i - 1]) breaks_.push_back(knots_[i]);
    }
    // span of element e: index of its left knot in the full vector
    element_spans_.clear();
    const int p = knots_.degree();
    for (int e = 0; e < static_cast<int>(breaks_.size()) - 1; ++e) element_spans_.push_back(p + e);
}

double SplineSpace1D::max_mesh_size() const {
    double h = 0.0;
    for (std::size_t e = 0; e + 1 < breaks_.size(); ++e) h = std::max(h, breaks_[e + 1] - breaks_[e]);
    return h;
}

int SplineSpace1D::find_element(double x) const {
    if (x < a() || x > b()) throw std::domain_error("SplineSpace1D: point outside basic interval");
    if (x == b()) return num_elements() - 1;  // closed last span
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return static_cast<int>(it - breaks_.begin()) - 1;
}

double SplineSpace1D::basis_value(int i, double x, int deriv) const {
    if (i < 0 || i >= dim_) throw std::out_of_range("SplineSpace1D: basis index");
    const BasisValues bv = eval_basis(*this, x, deriv);
    const int p = degree();
    const int local = i - (bv.span - p);
    if (local < 0 || local > p) return 0.0;
    return bv.values(deriv, local);
}

double SplineSpace1D::eval(const Eigen::VectorXd& coeffs, double x, int deriv) const {
    if (coeffs.size() != dim_) throw std::invalid_argument("SplineSpace1D::eval: coefficient size");
    const BasisValues bv = eval_basis(*this, x, deriv);
    const int p = degree();
    double s = 0.0;
    for (int j = 0; j <= p; ++j) s += coeffs[bv.span - p + j] * bv.values(deriv, j);
    return s;
}

SplineSpace1D make_uniform_space(double a, double b, int n_elements, int degree) {
    if (n_elements < 1) throw std::invalid_argument("make_uniform_space: n_elements must be >= 1");
    if (!(b > a)) throw std::invalid_argument("make_uniform_space: requires b > a");
    if (degree < 1) throw std::invalid_argument("make_uniform_space: degree must be >= 1");
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n_elements + 1 + 2 * degree));
    for (int i = 0; i <= degree; ++i) t.push_back(a);
    const double len = b - a;
    for (int i = 1; i < n_elements; ++i) {
        // i/n first: halving n maps exactly onto a subsequence of these values
        t.push_back(a + len * (static_cast<double>(i) / static_cast<double>(n_elements)));
    }
    for (int i = 0; i <= degree; ++i) t.push_back(b);
    return SplineSpace1D(KnotVector(std::move(t), degree));
}

BasisValues eval_basis(const SplineSpace1D& space, double x, int deriv_order) {
    const int p = space.degree();
    if (deriv_order < 0 || deriv_order > p)
        throw std::invalid_argument("eval_basis: deriv_order must be in [0, degree]");
    BasisValues out;
    out.span = space.span_of_element(space.find_element(x));
    ders_basis_funs(space.knots().values(), out.span, x, p, deriv_order, out.values);
    return out;
}

Eigen::VectorXd greville_abscissae(const SplineSpace1D& space) {
    const int p = space.degree();
    const auto& t = space.knots().values();
    Eigen::VectorXd g(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
        double s = 0.0;
        for (int j = 1; j <= p; ++j) s += t[static_cast<std::size_t>(i + j)];
        g[i] = s / static_cast<double>(p);
    }
    return g;
}

Eigen::MatrixXd prolongation_matrix(const SplineSpace1D& coarse, const SplineSpace1D& fine) {
    if (coarse.degree() != fine.degree())
        throw std::invalid_argument("prolongation_matrix: degree mismatch");
    const int p = coarse.degree();

    // multiset difference fine - coarse, exact comparison
    const auto& tf = fine.knots().values();
    std::vector<double> work(coarse.knots().values());
    std::vector<double> to_insert;
    {
        std::size_t ic = 0;
        for (const double v : tf) {
            if (ic < work.size() && work[ic] == v) {
                ++ic;
            } else {
                to_insert.push_back(v);
            }
        }
        if (ic != work.size())
            throw std::invalid_argument("prolongation_matrix: coarse knots not nested in fine knots");
    }

    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(coarse.dim(), coarse.dim());
    for (const double u : to_insert) {
        const int dim = static_cast<int>(work.size()) - p - 1;
        // span k with t_k <= u < t_{k+1} (u < b is guaranteed: endpoint knots always match)
        int k = 0;
        for (int i = 0; i + 1 < static_cast<int>(work.size()); ++i) {
            if (work[static_cast<std::size_t>(i)] <= u && u < work[static_cast<std::size_t>(i + 1)]) k = i;
        }
        // the single-knot insertion matrix is bidiagonal: apply it row-wise
        Eigen::MatrixXd next(dim + 1, P.cols());
        for (int i = 0; i <= dim; ++i) {
            if (i <= k - p) {
                next.row(i) = P.row(i);
            } else if (i <= k) {
                const double denom = work[static_cast<std::size_t>(i + p)] - work[static_cast<std::size_t>(i)];
                const double alpha = (u - work[static_cast<std::size_t>(i)]) / denom;
                next.row(i) = alpha * P.row(i) + (1.0 - alpha) * P.row(i - 1);
            } else {
                next.row(i) = P.row(i - 1);
            }
        }
        P = std::move(next);
        work.insert(work.begin() + (k + 1), u);
    }
    return P;
}

TensorSpace::TensorSpace(std::vector<SplineSpace1D> directions)
    : directions_(std::move(directions)) {
    if (directions_.empty()) throw std::invalid_argument("TensorSpace: needs at least one direction");
    dim_ = 1;
    for (const auto& s : directions_) {
        dims_.push_back(s.dim());
        dim_ *= s.dim();
    }
}

int TensorSpace::global_index(std::span<const int> multi) const {
    int g = 0;
    for (int d = 0; d < num_directions(); ++d) g = g * dims_[static_cast<std::size_t>(d)] + multi[static_cast<std::size_t>(d)];
    return g;
}

double TensorSpace::eval(const Eigen::VectorXd& coeffs, std::span<const double> x,
                         std::span<const int> derivs) const {
    const int d = num_directions();
    if (coeffs.size() != dim_) throw std::invalid_argument("TensorSpace::eval: coefficient size");
    std::vector<BasisValues> bv(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const int r = derivs.empty() ? 0 : derivs[static_cast<std::size_t>(k)];
        bv[static_cast<std::size_t>(k)] = eval_basis(directions_[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(k)], r);
    }
    // accumulate over the local (p_1+1) x ... x (p_d+1) block
    double total = 0.0;
    std::vector<int> local(static_cast<std::size_t>(d), 0);
    while (true) {
        double w = 1.0;
        int g = 0;
        for (int k = 0; k < d; ++k) {
            const auto& b = bv[static_cast<std::size_t>(k)];
            const int p = directions_[static_cast<std::size_t>(k)].degree();
            const int r = derivs.empty() ? 0 : derivs[static_cast<std::size_t>(k)];
            w *= b.values(r, local[static_cast<std::size_t>(k)]);
            g = g * dims_[static_cast<std::size_t>(k)] + (b.span - p + local[static_cast<std::size_t>(k)]);
        }
        total += w * coeffs[g];
        int k = d - 1;
        while (k >= 0) {
            if (++local[static_cast<std::size_t>(k)] <= directions_[static_cast<std::size_t>(k)].degree()) break;
            local[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    return total;
}

}  // namespace mqstab
