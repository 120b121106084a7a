#pragma once

#include "demf/mesh.hpp"
#include "demf/sparse.hpp"

namespace demf {

/// Piecewise-linear mass C_ij = <psi_i, psi_j>. Element contribution on a
/// triangle of area A is A/6 on the diagonal and A/12 off it.
SparseSymmetric assemble_mass(const Mesh2D& mesh);

/// Piecewise-linear stiffness G_ij = <grad psi_i, grad psi_j> with natural
/// (Neumann) boundary: every row sums to zero.
SparseSymmetric assemble_stiffness(const Mesh2D& mesh);

/// Diagonal matrix of the row sums of a mass matrix. Throws InputError when a
/// row sum is not positive.
SparseSymmetric lumped_mass(const SparseSymmetric& mass);

struct SpatialFem {
  SparseSymmetric mass;         // consistent C
  SparseSymmetric lumped_mass;  // C tilde
  SparseSymmetric stiffness;    // G
};

SpatialFem assemble_spatial(const Mesh2D& mesh);

enum class TemporalMass {
  /// P1 Galerkin mass: interior row (h/6, 2h/3, h/6).
  consistent,
  /// Row-sum lumped mass: h inside, h/2 at the two ends.
  lumped,
};

struct TemporalFem {
  SparseSymmetric m0;  // mass
  SparseSymmetric m1;  // 1/2 at the first and last diagonal entries
  SparseSymmetric m2;  // stiffness: (-1/h, 2/h, -1/h), boundary diagonal 1/h
  TemporalMass mass_kind;
  double step;
};

TemporalFem temporal_matrices(const TimeGrid& grid, TemporalMass mass = TemporalMass::consistent);

}  // namespace demf
