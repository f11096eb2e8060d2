#pragma once

#include <Eigen/Dense>

namespace mqstab {

/// Gauss-Legendre rule on the reference interval [-1, 1]; exact for
/// polynomials of degree <= 2*points - 1.
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    int size() const noexcept { return static_cast<int>(nodes.size()); }
};

GaussRule quadrature_rule(int points);

}  // namespace mqstab
