#pragma once

namespace mqstab {

/// Discrete inf-sup constant between the fine space S^p on n uniform
/// elements of [0, 1] with homogeneous boundary conditions and the degree
/// p-1 space on the L-fold dyadically coarsened mesh (no boundary
/// conditions). Returns sqrt of the smallest eigenvalue of the pencil
/// (B M_V^{-1} B^T, M_Q); always in (0, 1].
double compute_infsup(int degree, int levels, int elements);

}  // namespace mqstab
