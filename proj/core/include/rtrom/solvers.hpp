#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rtrom/linalg.hpp"
#include "rtrom/transport.hpp"

namespace rtrom {

/// Iteration-indexed preconditioner M_j^{-1}. Iterations are numbered from 1.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Vector apply(int iteration, const Vector& v) = 0;
  /// True if M_j^{-1} is the same linear map for every j.
  virtual bool is_linear() const = 0;
  /// Short name of the map used at this iteration, recorded in solve traces.
  virtual std::string label(int iteration) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  Vector apply(int, const Vector& v) override { return v; }
  bool is_linear() const override { return true; }
  std::string label(int) const override { return "identity"; }
};

using LinearMap = std::function<Vector(const Vector&)>;

/// Arnoldi data of a (flexible) GMRES run.
struct KrylovState {
  std::vector<Vector> v;  ///< orthonormal basis v^(1..j+1)
  std::vector<Vector> z;  ///< preconditioned vectors z^(1..j); empty for right GMRES
  Matrix H;               ///< (j+1) x j Hessenberg matrix
  double beta = 0.0;      ///< ||r^(0)||_2
  int iterations = 0;
  std::vector<double> residual_history;  ///< relative residual before iteration 1, then after each
};

struct KrylovOptions {
  double tol = 1e-11;
  int max_iter = 200;
  /// Second MGS pass when ||w|| drops below 0.1 of its norm before orthogonalization.
  bool reorthogonalize = false;
};

struct KrylovResult {
  Vector x;
  KrylovState state;
  bool converged = false;
  bool breakdown = false;
  std::vector<std::string> trace;
};

/// y* = argmin ||beta e1 - H y||_2 for an upper Hessenberg (j+1) x j matrix, via Givens rotations.
Vector least_squares_hessenberg(const Matrix& H, double beta);

/// Flexible GMRES on A x = b with z^(j) = M_j^{-1} v^(j) stored and x = x0 + Z y.
/// Convergence is |g_{j+1}| <= tol * ||b||, from the Givens-updated residual.
/// `r0` may be supplied to avoid recomputing b - A x0.
KrylovResult fgmres_solve(const LinearMap& A, Preconditioner& M, const Vector& b, const Vector& x0,
                          const KrylovOptions& opts, const Vector* r0 = nullptr);

/// Right-preconditioned GMRES; M must be linear. x = x0 + M^{-1}(V y).
KrylovResult gmres_right_solve(const LinearMap& A, Preconditioner& M, const Vector& b, const Vector& x0,
                               const KrylovOptions& opts, const Vector* r0 = nullptr);

struct SolveReport {
  std::string method;
  Vector phi;
  int iterations = 0;
  long sweeps = 0;
  std::vector<double> residual_history;
  double r_inf = 0.0;  ///< ||A~ phi - b~||_inf, evaluated after the solve (not counted as a sweep)
  double wall_seconds = 0.0;
  /// Parameter-dependent preconditioner setup (DSA factorization, reduced binding), outside wall_seconds.
  double setup_seconds = 0.0;
  std::vector<std::string> preconditioner_trace;
  bool converged = false;
};

struct SiOptions {
  double tol = 1e-11;
  int max_iter = 1000;
};

/// Source iteration, optionally synthetic-accelerated: with r = phi* - phi_prev,
/// phi = phi_prev + M_l^{-1} r (i.e. phi* + C^{-1} Sigma_s r for an SA map), else phi = phi*.
/// Stops when ||r||_2 <= tol ||b~||_2.
SolveReport source_iteration(const TransportOperator& op, Preconditioner* sa, const SiOptions& opts,
                             const Vector& phi0 = Vector());

/// Right-preconditioned GMRES on A~ phi = b~. Sweeps: iterations + 1, plus 1 for a nonzero guess.
SolveReport gmres_right(const TransportOperator& op, Preconditioner& M, const KrylovOptions& opts,
                        const Vector& phi0 = Vector());

/// Flexible GMRES on A~ phi = b~. If `state` is given it receives the Arnoldi data.
SolveReport fgmres(const TransportOperator& op, Preconditioner& M, const KrylovOptions& opts,
                   const Vector& phi0 = Vector(), KrylovState* state = nullptr);

}  // namespace rtrom
