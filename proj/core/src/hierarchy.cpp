#include "mqstab/hierarchy.hpp"

#include <cmath>
#include <stdexcept>

namespace mqstab {

namespace {

double max_diameter(const std::vector<double>& per_direction_mesh_size) {
    double s = 0.0;
    for (const double h : per_direction_mesh_size) s += h * h;
    return std::sqrt(s);
}

std::vector<double> mesh_sizes(const std::vector<SplineSpace1D>& spaces) {
    std::vector<double> out;
    out.reserve(spaces.size());
    for (const auto& s : spaces) out.push_back(s.max_mesh_size());
    return out;
}

}  // namespace

SplineSpace1D dyadic_coarsen(const SplineSpace1D& space) {
    const int ne = space.num_elements();
    if (ne < 2 || ne % 2 != 0)
        throw std::invalid_argument("dyadic_coarsen: element count must be even and >= 2");
    const int p = space.degree();
    const auto& brk = space.breakpoints();
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(ne / 2 + 1 + 2 * p));
    for (int i = 0; i <= p; ++i) t.push_back(brk.front());
    for (int e = 2; e < ne; e += 2) t.push_back(brk[static_cast<std::size_t>(e)]);
    for (int i = 0; i <= p; ++i) t.push_back(brk.back());
    return SplineSpace1D(KnotVector(std::move(t), p));
}

MeshHierarchy build_hierarchy(const TensorSpace& fine, int levels) {
    if (levels < 1) throw std::invalid_argument("build_hierarchy: levels must be >= 1");
    const int d = fine.num_directions();
    for (int dir = 0; dir < d; ++dir) {
        const int ne = fine.direction(dir).num_elements();
        const int cap = static_cast<int>(std::floor(std::log2(static_cast<double>(ne))));
        const int steps = std::min(levels, cap);
        const long long div = 1LL << steps;
        if (ne % div != 0)
            throw std::invalid_argument("build_hierarchy: element count must be divisible by 2^min(L, floor(log2(n)))");
    }

    std::vector<double> fine_sizes;
    for (int dir = 0; dir < d; ++dir) fine_sizes.push_back(fine.direction(dir).max_mesh_size());
    const double fine_diam = max_diameter(fine_sizes);

    MeshHierarchy hier{fine, {}, fine_diam};
    std::vector<SplineSpace1D> current;
    for (int dir = 0; dir < d; ++dir) current.push_back(fine.direction(dir));

    for (int k = 1; k <= levels; ++k) {
        std::vector<SplineSpace1D> next;
        next.reserve(static_cast<std::size_t>(d));
        for (int dir = 0; dir < d; ++dir) {
            const auto& s = current[static_cast<std::size_t>(dir)];
            const int ne = s.num_elements();
            if (ne >= 2 && ne % 2 == 0) {
                next.push_back(dyadic_coarsen(s));
            } else {
                next.push_back(s);  // frozen at its coarsest admissible space
            }
        }
        HierarchyLevel lvl;
        lvl.spaces = next;
        lvl.mesh_size = mesh_sizes(next);
        lvl.diameter = max_diameter(lvl.mesh_size);
        lvl.weight = fine_diam / lvl.diameter;
        hier.levels.push_back(std::move(lvl));
        current = std::move(next);
    }
    return hier;
}

double sigma_constant(const MeshHierarchy& hier, int degree) {
    double sum = 0.0;
    for (const auto& lvl : hier.levels)
        sum += lvl.weight * std::pow(lvl.diameter, 2.0 * degree);
    return sum;
}

}  // namespace mqstab
