#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "rtrom/discretization.hpp"
#include "rtrom/linalg.hpp"
#include "rtrom/solvers.hpp"

namespace rtrom {

/// Angular moments of the quadrature used by the P1 closure, per axis a, b in {x, y}:
///   mu2[a] = sum w O_a^2,  abs1[a] = sum w |O_a|,  c[a][b] = sum w |O_a| O_b^2.
struct MomentConstants {
  std::array<double, 2> mu2{};
  std::array<double, 2> abs1{};
  std::array<std::array<double, 2>, 2> c{};
};

MomentConstants moment_constants(const AngularQuadrature& quad);

/// Zeroth and first angular moments of the DG correction equations under the
/// P1 ansatz dpsi_j = dphi + 3 Omega_j . dJ, written for any number of axes:
///
///   (Sigma_a + sum_a abs1_a P_a) dphi + sum_a 3 mu2_a C_a dJ_a = Sigma_s r
///   mu2_b C_b dphi + (3 mu2_b Sigma_t + 3 sum_a c_ab P_a) dJ_b = 0
///
/// C_a is the central-flux advection operator and P_a = -D_J/2 the jump penalty.
/// The partially consistent variant drops the P terms in the current equations.
struct MomentSystem {
  Vector sigma_a;  ///< per-DOF diagonal
  Vector sigma_t;  ///< per-DOF diagonal
  std::vector<SparseMatrix> central;
  std::vector<SparseMatrix> jump;
  std::vector<double> mu2;
  std::vector<double> abs1;
  std::vector<std::vector<double>> c;

  int num_axes() const { return static_cast<int>(central.size()); }
  Eigen::Index size() const { return sigma_a.size(); }
};

MomentSystem moment_system(const BoundOperators& bound);

enum class DsaVariant { FullyConsistent, PartiallyConsistent };
enum class DsaInnerSolver { Direct, Pcg };

DsaVariant parse_dsa_variant(const std::string& name);
std::string to_string(DsaVariant v);
DsaInnerSolver parse_inner_solver(const std::string& name);

struct DsaOptions {
  DsaVariant variant = DsaVariant::FullyConsistent;
  DsaInnerSolver inner = DsaInnerSolver::Direct;
  double inner_tol = 1e-12;
  int inner_max_iter = 20000;
};

/// Current-equation block 3 mu2_b Sigma_t (+ 3 sum_a c_ab P_a for FC) of axis b.
SparseMatrix current_block(const MomentSystem& sys, int b, DsaVariant variant);

/// Eliminated scalar-flux operator
///   C = A00 - sum_b (3 mu2_b C_b) B_b^{-1} (mu2_b C_b), dense. Oracle path.
Matrix dense_diffusion_operator(const MomentSystem& sys, DsaVariant variant);

/// Partially consistent operator A00 + sum_b mu2_b C_b^T Sigma_t^{-1} C_b, sparse SPD.
SparseMatrix pc_diffusion_matrix(const MomentSystem& sys);

/// Mixed (scalar flux, currents) matrix of the moment equations.
SparseMatrix mixed_moment_matrix(const MomentSystem& sys, DsaVariant variant);

/// Result of a preconditioned CG solve.
struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// CG for an SPD operator with an optional preconditioner (empty map = none).
/// Throws ConfigError if a non-positive curvature is met.
CgResult conjugate_gradient(const LinearMap& A, const Vector& b, const LinearMap& M, double tol, int max_iter);

/// Symmetric Gauss-Seidel sweep pair for a symmetric sparse matrix, as a preconditioner.
LinearMap symmetric_gauss_seidel(const SparseMatrix& A);

/// Diffusion synthetic acceleration: M^{-1} r = r + C^{-1} Sigma_s r.
class DsaOperator final : public Preconditioner {
 public:
  explicit DsaOperator(const BoundOperators& bound, DsaOptions opts = {});
  ~DsaOperator() override;
  DsaOperator(const DsaOperator&) = delete;
  DsaOperator& operator=(const DsaOperator&) = delete;

  const DsaOptions& options() const { return opts_; }
  const MomentSystem& system() const { return sys_; }

  /// C^{-1} rhs.
  Vector solve(const Vector& rhs) const;
  /// C^{-1} Sigma_s r.
  Vector correction(const Vector& r) const;

  Vector apply(int iteration, const Vector& r) override;
  bool is_linear() const override { return true; }
  std::string label(int) const override;

  /// Dense eliminated operator C (small instances only).
  Matrix dense_matrix() const { return dense_diffusion_operator(sys_, opts_.variant); }

 private:
  struct Factorization;

  Vector solve_pcg(const Vector& rhs) const;

  const BoundOperators* bound_;
  DsaOptions opts_;
  MomentSystem sys_;
  std::unique_ptr<Factorization> fact_;
};

}  // namespace rtrom
