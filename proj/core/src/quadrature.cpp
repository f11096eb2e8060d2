#include "mqstab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mqstab {

GaussRule quadrature_rule(int points) {
    if (points < 1) throw std::invalid_argument("quadrature_rule: points must be >= 1");
    const int n = points;
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    // Newton on P_n with the Chebyshev-like initial guess; symmetric pairs.
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
    return rule;
}

}  // namespace mqstab
