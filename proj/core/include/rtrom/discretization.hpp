#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rtrom/dg_basis.hpp"
#include "rtrom/linalg.hpp"
#include "rtrom/material.hpp"
#include "rtrom/mesh.hpp"
#include "rtrom/quadrature.hpp"

namespace rtrom {

/// Coupling of a cell to its upwind neighbor across one inflow face:
/// the block (Omega . n) F_f that multiplies the neighbor's unknowns.
struct InflowCoupling {
  Face face;
  Matrix block;
};

/// Parameter-independent pieces of the upwind DG S_N discretization.
///
/// On a uniform mesh the cell-diagonal block of D_j is the same for every
/// cell, so D_j is stored as that block plus the inflow-face couplings and is
/// applied matrix-free. Cross sections are collocated at cell centers, which
/// makes Sigma_t and Sigma_s diagonal in the orthonormal basis.
class DiscreteOperators {
 public:
  DiscreteOperators(Mesh2D mesh, int order, AngularQuadrature quad, MaterialField material);

  const Mesh2D& mesh() const { return mesh_; }
  const DgBasis& basis() const { return basis_; }
  const AngularQuadrature& quadrature() const { return quad_; }
  const MaterialField& material() const { return material_; }

  int num_directions() const { return quad_.size(); }
  int num_cells() const { return mesh_.num_cells(); }
  int dofs_per_cell() const { return basis_.dofs_per_cell(); }
  int num_dofs() const { return num_cells() * dofs_per_cell(); }

  /// Number of cross-section pieces in the affine expansion.
  int num_pieces() const { return static_cast<int>(piece_sigma_s_.size()); }
  /// Per-cell shape values of piece p.
  const Vector& piece_sigma_s(int p) const { return piece_sigma_s_[static_cast<std::size_t>(p)]; }
  const Vector& piece_sigma_a(int p) const { return piece_sigma_a_[static_cast<std::size_t>(p)]; }

  int num_source_pieces() const { return static_cast<int>(source_volume_.size()); }
  /// Projected volume source of piece q (length num_dofs).
  const Vector& source_volume(int q) const { return source_volume_[static_cast<std::size_t>(q)]; }
  /// Projected inflow data of piece q for direction j; empty if the piece has none.
  const Vector& source_inflow(int q, int j) const;
  bool source_has_inflow(int q) const { return !source_inflow_[static_cast<std::size_t>(q)].empty(); }

  /// Cell-diagonal block of D_j.
  const Matrix& local_block(int j) const { return local_blocks_[static_cast<std::size_t>(j)]; }
  /// Inflow faces of direction j with their neighbor couplings.
  const std::vector<InflowCoupling>& inflow_couplings(int j) const {
    return inflow_[static_cast<std::size_t>(j)];
  }

  /// y = D_j x and y = D_j^T x, matrix-free.
  void apply_advection(int j, const Vector& x, Vector& y) const;
  void apply_advection_transpose(int j, const Vector& x, Vector& y) const;

  /// Assembled D_j.
  SparseMatrix advection_matrix(int j) const;

  /// Central-flux advection operator along one axis (0 = x, 1 = y); skew-symmetric.
  const SparseMatrix& central(int axis) const { return central_[static_cast<std::size_t>(axis)]; }
  /// Jump penalty along one axis, -1/2 D_J; symmetric positive semidefinite.
  /// Both treat the exterior trace on the domain boundary as zero, so that
  /// D_j = Ox C_x + Oy C_y + |Ox| P_x + |Oy| P_y.
  const SparseMatrix& jump(int axis) const { return jump_[static_cast<std::size_t>(axis)]; }

  /// Stable fingerprint of the discretization (mesh, order, quadrature, material shapes).
  std::uint64_t hash() const { return hash_; }

 private:
  void assemble_axis_operators();
  void assemble_direction_blocks();
  void assemble_sources();
  void compute_hash();

  Mesh2D mesh_;
  DgBasis basis_;
  AngularQuadrature quad_;
  MaterialField material_;

  std::vector<Vector> piece_sigma_s_;
  std::vector<Vector> piece_sigma_a_;
  std::vector<Vector> source_volume_;
  std::vector<std::vector<Vector>> source_inflow_;
  std::vector<Matrix> local_blocks_;
  std::vector<std::vector<InflowCoupling>> inflow_;
  std::array<SparseMatrix, 2> central_;
  std::array<SparseMatrix, 2> jump_;
  std::uint64_t hash_ = 0;
};

/// DiscreteOperators with the affine coefficients evaluated at one parameter.
/// Holds a reference to the operators, which must outlive it.
class BoundOperators {
 public:
  BoundOperators(const DiscreteOperators& ops, Parameter mu);

  const DiscreteOperators& ops() const { return *ops_; }
  const Parameter& mu() const { return mu_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  /// Per-cell cross sections at this parameter.
  const Vector& sigma_t() const { return sigma_t_; }
  const Vector& sigma_s() const { return sigma_s_; }
  const Vector& sigma_a() const { return sigma_a_; }

  /// Sigma_s x and Sigma_t x for a scalar-flux-sized vector.
  Vector apply_sigma_s(const Vector& x) const;
  Vector apply_sigma_t(const Vector& x) const;

  const Vector& source() const { return source_; }
  /// Inflow boundary vector g_j^(bc).
  Vector boundary(int j) const;
  /// G + g_j^(bc).
  Vector source_tilde(int j) const;

 private:
  const DiscreteOperators* ops_;
  Parameter mu_;
  std::vector<double> coefficients_;
  std::vector<double> source_coefficients_;
  Vector sigma_t_;
  Vector sigma_s_;
  Vector sigma_a_;
  Vector source_;
};

/// Binds the affine coefficients at mu. Warns (does not fail) outside the box.
BoundOperators evaluate_affine(const DiscreteOperators& ops, const Parameter& mu);

/// Expands per-cell values to per-DOF diagonal entries.
Vector cell_to_dof(const Vector& cell_values, int dofs_per_cell);

struct FullSystem {
  Matrix A;
  Vector b;
};

/// Dense coupled system over all directions: block (j, j') = delta (D_j + Sigma_t) - w_j' Sigma_s.
/// Oracle path only; refuses systems larger than `cap` unknowns.
FullSystem build_full_matrix(const BoundOperators& bound, std::size_t cap = 20000);

}  // namespace rtrom
