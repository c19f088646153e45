#pragma once

// Small instances and dense reference computations shared by the unit and
// acceptance tests. Everything here works on explicitly assembled matrices so
// it can check the matrix-free paths of the library.

#include <random>
#include <vector>

#include "rtrom/discretization.hpp"
#include "rtrom/linalg.hpp"
#include "rtrom/problems.hpp"
#include "rtrom/transport.hpp"

namespace rtrom::testing {

inline double rel_l2(const Vector& a, const Vector& b) {
  const double n = b.norm();
  return n > 0.0 ? (a - b).norm() / n : a.norm();
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

/// Uniform material on the unit square: sigma_s, sigma_a and G constant, vacuum inflow.
inline MaterialField uniform_material(double sigma_s, double sigma_a, double source) {
  ParameterBox box{{0.0}, {1.0}};
  std::vector<CrossSectionPiece> pieces{
      {"uniform", unit_coefficient(), [sigma_s](double, double) { return sigma_s; },
       [sigma_a](double, double) { return sigma_a; }},
  };
  std::vector<SourcePiece> sources{{"volume", unit_coefficient(), [source](double, double) { return source; }, {}}};
  return MaterialField(box, pieces, sources);
}

/// The lattice material on a custom mesh and quadrature.
inline DiscreteOperators lattice_instance(int nx, int ny, int n_theta, int n_z) {
  const ProblemFamily fam = make_problem("lattice", Scale::Desk);
  return DiscreteOperators(Mesh2D(fam.domain, nx, ny), 1, build_cl_quadrature(n_theta, n_z), fam.material);
}

/// The oracle instance: 4x4 cells, K = 1, CL(4,2), lattice material.
inline DiscreteOperators oracle_instance() { return lattice_instance(4, 4, 4, 2); }

/// D_j + Sigma_t, dense.
inline Matrix dense_direction_block(const BoundOperators& bound, int j) {
  const auto& ops = bound.ops();
  Matrix A = Matrix(ops.advection_matrix(j));
  A.diagonal() += cell_to_dof(bound.sigma_t(), ops.dofs_per_cell());
  return A;
}

inline Matrix dense_sigma_s(const BoundOperators& bound) {
  return cell_to_dof(bound.sigma_s(), bound.ops().dofs_per_cell()).asDiagonal();
}

/// T = sum_j w_j (D_j + Sigma_t)^{-1}, dense.
inline Matrix dense_T(const BoundOperators& bound) {
  const auto& ops = bound.ops();
  const Eigen::Index n = ops.num_dofs();
  Matrix T = Matrix::Zero(n, n);
  for (int j = 0; j < ops.num_directions(); ++j) {
    T += ops.quadrature().weight(j) * dense_direction_block(bound, j).partialPivLu().inverse();
  }
  return T;
}

/// A~ = I - T Sigma_s, dense.
inline Matrix dense_A_tilde(const BoundOperators& bound) {
  const Eigen::Index n = bound.ops().num_dofs();
  return Matrix::Identity(n, n) - dense_T(bound) * dense_sigma_s(bound);
}

/// b~ = sum_j w_j (D_j + Sigma_t)^{-1} (G + g_j), dense.
inline Vector dense_b_tilde(const BoundOperators& bound) {
  const auto& ops = bound.ops();
  Vector b = Vector::Zero(ops.num_dofs());
  for (int j = 0; j < ops.num_directions(); ++j) {
    b += ops.quadrature().weight(j) * dense_direction_block(bound, j).partialPivLu().solve(bound.source_tilde(j));
  }
  return b;
}

/// Scalar flux from a direct solve of the coupled all-direction system.
inline Vector dense_scalar_flux(const BoundOperators& bound) {
  const FullSystem sys = build_full_matrix(bound);
  const Vector psi = sys.A.partialPivLu().solve(sys.b);
  return integrate_angular_flux(bound.ops().quadrature(), psi);
}

/// A~ assembled column by column from the matrix-free operator.
inline Matrix assembled_A_tilde(const TransportOperator& op) {
  const Eigen::Index n = op.num_dofs();
  Matrix A(n, n);
  Vector e = Vector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e(k) = 1.0;
    A.col(k) = op.apply_A_tilde(e);
    e(k) = 0.0;
  }
  return A;
}

}  // namespace rtrom::testing
