#include "rtrom/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_zero_guess(const Vector& x0) { return x0.size() == 0 || x0.isZero(0.0); }

struct Givens {
  double c = 1.0;
  double s = 0.0;
};

Givens make_givens(double a, double b) {
  if (b == 0.0) return {a >= 0.0 ? 1.0 : -1.0, 0.0};
  const double r = std::hypot(a, b);
  return {a / r, b / r};
}

// Back substitution on the leading k x k block of an upper triangular matrix.
Vector upper_solve(const Matrix& R, const Vector& g, int k) {
  Vector y = Vector::Zero(k);
  for (int i = k - 1; i >= 0; --i) {
    double s = g(i);
    for (int l = i + 1; l < k; ++l) s -= R(i, l) * y(l);
    y(i) = s / R(i, i);
  }
  return y;
}

KrylovResult krylov_core(const LinearMap& A, Preconditioner& M, const Vector& b, const Vector& x0,
                         const KrylovOptions& opts, const Vector* r0, bool flexible) {
  if (opts.max_iter < 1) throw DomainError("Krylov solver: max_iter must be at least 1");
  if (!(opts.tol > 0.0)) throw DomainError("Krylov solver: tol must be positive");
  const Eigen::Index n = b.size();
  KrylovResult res;
  res.x = is_zero_guess(x0) ? Vector::Zero(n) : x0;

  const double bnorm = b.norm();
  Vector r;
  if (r0 != nullptr) {
    r = *r0;
  } else if (is_zero_guess(x0)) {
    r = b;
  } else {
    r = b - A(x0);
  }
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  const double beta = r.norm();
  auto& st = res.state;
  st.beta = beta;
  st.residual_history.push_back(beta / scale);
  if (beta <= opts.tol * bnorm || beta == 0.0) {
    res.converged = true;
    st.H = Matrix::Zero(1, 0);
    return res;
  }

  const int m = opts.max_iter;
  Matrix H = Matrix::Zero(m + 1, m);
  Matrix R = Matrix::Zero(m + 1, m);
  std::vector<Givens> rot;
  rot.reserve(static_cast<std::size_t>(m));
  Vector g = Vector::Zero(m + 1);
  g(0) = beta;
  st.v.push_back(r / beta);

  int j = 0;
  for (; j < m;) {
    const int it = j + 1;
    Vector z = M.apply(it, st.v[static_cast<std::size_t>(j)]);
    res.trace.push_back(M.label(it));
    Vector w = A(z);
    if (flexible) st.z.push_back(std::move(z));

    const double w0 = w.norm();
    for (int i = 0; i <= j; ++i) {
      const double h = st.v[static_cast<std::size_t>(i)].dot(w);
      H(i, j) = h;
      w -= h * st.v[static_cast<std::size_t>(i)];
    }
    if (opts.reorthogonalize && w.norm() < 0.1 * w0) {
      for (int i = 0; i <= j; ++i) {
        const double h = st.v[static_cast<std::size_t>(i)].dot(w);
        H(i, j) += h;
        w -= h * st.v[static_cast<std::size_t>(i)];
      }
    }
    const double hnext = w.norm();
    H(j + 1, j) = hnext;

    for (int i = 0; i <= j + 1; ++i) R(i, j) = H(i, j);
    for (int i = 0; i < j; ++i) {
      const auto [c, s] = rot[static_cast<std::size_t>(i)];
      const double a = R(i, j);
      const double bb = R(i + 1, j);
      R(i, j) = c * a + s * bb;
      R(i + 1, j) = -s * a + c * bb;
    }
    const Givens gr = make_givens(R(j, j), R(j + 1, j));
    rot.push_back(gr);
    R(j, j) = gr.c * R(j, j) + gr.s * R(j + 1, j);
    R(j + 1, j) = 0.0;
    g(j + 1) = -gr.s * g(j);
    g(j) = gr.c * g(j);

    const double resid = std::abs(g(j + 1));
    st.residual_history.push_back(resid / scale);
    j = it;
    if (resid <= opts.tol * bnorm) {
      res.converged = true;
      break;
    }
    if (hnext == 0.0) {
      res.breakdown = true;
      break;
    }
    st.v.push_back(w / hnext);
  }

  st.iterations = j;
  st.H = H.topLeftCorner(j + 1, j);
  if (R(j - 1, j - 1) == 0.0) {
    res.breakdown = true;
    return res;
  }
  const Vector y = upper_solve(R, g, j);
  if (flexible) {
    for (int i = 0; i < j; ++i) res.x += y(i) * st.z[static_cast<std::size_t>(i)];
  } else {
    Vector vy = Vector::Zero(n);
    for (int i = 0; i < j; ++i) vy += y(i) * st.v[static_cast<std::size_t>(i)];
    res.x += M.apply(j + 1, vy);
  }
  return res;
}

}  // namespace

Vector least_squares_hessenberg(const Matrix& H, double beta) {
  const Eigen::Index k = H.cols();
  if (H.rows() != k + 1) {
    throw DomainError("least_squares_hessenberg: expected a (j+1) x j matrix, got " +
                      std::to_string(H.rows()) + " x " + std::to_string(k));
  }
  if (k == 0 || beta == 0.0) return Vector::Zero(k);
  Matrix R = H;
  Vector g = Vector::Zero(k + 1);
  g(0) = beta;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Givens gr = make_givens(R(j, j), R(j + 1, j));
    for (Eigen::Index l = j; l < k; ++l) {
      const double a = R(j, l);
      const double b = R(j + 1, l);
      R(j, l) = gr.c * a + gr.s * b;
      R(j + 1, l) = -gr.s * a + gr.c * b;
    }
    const double a = g(j);
    g(j) = gr.c * a;
    g(j + 1) = -gr.s * a;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (R(j, j) == 0.0) throw NumericalError("least_squares_hessenberg: rank-deficient Hessenberg matrix");
  }
  return upper_solve(R, g, static_cast<int>(k));
}

KrylovResult fgmres_solve(const LinearMap& A, Preconditioner& M, const Vector& b, const Vector& x0,
                          const KrylovOptions& opts, const Vector* r0) {
  return krylov_core(A, M, b, x0, opts, r0, true);
}

KrylovResult gmres_right_solve(const LinearMap& A, Preconditioner& M, const Vector& b, const Vector& x0,
                               const KrylovOptions& opts, const Vector* r0) {
  if (!M.is_linear()) throw ConfigError("right-preconditioned GMRES needs a linear preconditioner");
  return krylov_core(A, M, b, x0, opts, r0, false);
}

namespace {

double residual_inf(const TransportOperator& op, const Vector& phi, const Vector& b) {
  return (op.apply_A_tilde(phi) - b).lpNorm<Eigen::Infinity>();
}

SolveReport krylov_report(const TransportOperator& op, Preconditioner& M, const KrylovOptions& opts,
                          const Vector& phi0, bool flexible, KrylovState* state) {
  const auto t0 = Clock::now();
  const long d0 = op.direction_sweeps();
  const Vector b = op.rhs_tilde();
  LinearMap A = [&op](const Vector& v) { return op.apply_A_tilde(v); };
  KrylovResult kr = flexible ? fgmres_solve(A, M, b, phi0, opts) : gmres_right_solve(A, M, b, phi0, opts);

  SolveReport rep;
  rep.method = flexible ? "fgmres" : "gmres";
  rep.sweeps = (op.direction_sweeps() - d0) / op.num_directions();
  rep.wall_seconds = seconds_since(t0);
  rep.iterations = kr.state.iterations;
  rep.residual_history = kr.state.residual_history;
  rep.preconditioner_trace = std::move(kr.trace);
  rep.converged = kr.converged;
  rep.phi = std::move(kr.x);
  rep.r_inf = residual_inf(op, rep.phi, b);
  if (state != nullptr) *state = std::move(kr.state);
  return rep;
}

}  // namespace

SolveReport gmres_right(const TransportOperator& op, Preconditioner& M, const KrylovOptions& opts,
                        const Vector& phi0) {
  if (!M.is_linear()) throw ConfigError("gmres_right: preconditioner '" + M.label(1) + "' is not linear");
  return krylov_report(op, M, opts, phi0, false, nullptr);
}

SolveReport fgmres(const TransportOperator& op, Preconditioner& M, const KrylovOptions& opts,
                   const Vector& phi0, KrylovState* state) {
  return krylov_report(op, M, opts, phi0, true, state);
}

SolveReport source_iteration(const TransportOperator& op, Preconditioner* sa, const SiOptions& opts,
                             const Vector& phi0) {
  if (!(opts.tol > 0.0)) throw DomainError("source_iteration: tol must be positive");
  const auto t0 = Clock::now();
  const long d0 = op.direction_sweeps();
  const auto& bound = op.bound();
  const Vector b = op.rhs_tilde();
  const double bnorm = b.norm();

  SolveReport rep;
  rep.method = sa ? "si_" + sa->label(1) : "si";
  const bool zero_guess = is_zero_guess(phi0);
  Vector phi_prev = zero_guess ? Vector::Zero(b.size()) : phi0;

  if (bnorm == 0.0 && zero_guess) {
    rep.converged = true;
    rep.phi = phi_prev;
  } else if (bound.sigma_s().isZero(0.0)) {
    // A~ = I: the first update is exact.
    rep.phi = b;
    rep.iterations = 1;
    rep.residual_history.push_back(0.0);
    rep.converged = true;
  } else {
    const double scale = bnorm > 0.0 ? bnorm : 1.0;
    for (int l = 1; l <= opts.max_iter; ++l) {
      Vector phi_star = (l == 1 && zero_guess) ? b : Vector(op.apply_T(bound.apply_sigma_s(phi_prev)) + b);
      const Vector r = phi_star - phi_prev;
      const double rn = r.norm();
      rep.residual_history.push_back(rn / scale);
      if (sa != nullptr) {
        phi_prev += sa->apply(l, r);
        rep.preconditioner_trace.push_back(sa->label(l));
      } else {
        phi_prev = std::move(phi_star);
      }
      rep.iterations = l;
      if (rn <= opts.tol * bnorm) {
        rep.converged = true;
        break;
      }
    }
    rep.phi = phi_prev;
  }
  rep.sweeps = (op.direction_sweeps() - d0) / op.num_directions();
  rep.wall_seconds = seconds_since(t0);
  rep.r_inf = residual_inf(op, rep.phi, b);
  return rep;
}

}  // namespace rtrom
