#pragma once

#include "mqstab/spline.hpp"

#include <vector>

namespace mqstab {

/// One coarsening level: per-direction spaces, per-direction mesh sizes,
/// the scalar mesh diameter H and the weight c = h/H.
struct HierarchyLevel {
    std::vector<SplineSpace1D> spaces;
    std::vector<double> mesh_size;  ///< max element length per direction
    double diameter = 0.0;          ///< max element diameter (scalar H)
    double weight = 0.0;            ///< c = fine diameter / level diameter
};

/// Dyadic multilevel coarsening of a fine tensor space. Level k is obtained
/// from level k-1 by removing every second interior knot per direction; a
/// direction that reaches one element stays frozen on deeper levels.
struct MeshHierarchy {
    TensorSpace fine;
    std::vector<HierarchyLevel> levels;
    double fine_diameter = 0.0;

    int num_levels() const noexcept { return static_cast<int>(levels.size()); }
};

/// Remove every second interior knot, doubling the element size. Keeps the
/// breakpoints with even element index, so level-k knots sit at multiples of
/// 2^k h on uniform meshes. Requires an even element count >= 2.
SplineSpace1D dyadic_coarsen(const SplineSpace1D& space);

/// Build L dyadic levels. Each direction must have its element count
/// divisible by 2^min(L, cap) with cap = floor(log2(elements)); a direction
/// coarsens while it has an even element count >= 2 and freezes afterwards.
MeshHierarchy build_hierarchy(const TensorSpace& fine, int levels);

/// Multilevel approximation constant: sum_k c_k * H_k^(2p) with H_k the
/// per-level max element diameter.
double sigma_constant(const MeshHierarchy& hier, int degree);

}  // namespace mqstab
