#include "rtrom/dsa.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

// Axes with zero second moment carry no current (e.g. Ox = 0 for every node).
constexpr double kInactiveMoment = 1e-300;

bool active(const MomentSystem& sys, int b) { return sys.mu2[static_cast<std::size_t>(b)] > kInactiveMoment; }

SparseMatrix diagonal(const Vector& d) {
  SparseMatrix D(d.size(), d.size());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d(i));
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SparseMatrix scalar_block(const MomentSystem& sys) {
  SparseMatrix A00 = diagonal(sys.sigma_a);
  for (int a = 0; a < sys.num_axes(); ++a) A00 += sys.abs1[static_cast<std::size_t>(a)] * sys.jump[static_cast<std::size_t>(a)];
  return A00;
}

void append_block(std::vector<Triplet>& t, const SparseMatrix& M, double scale, Eigen::Index r0, Eigen::Index c0) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

std::string tail(const std::vector<double>& h) {
  std::ostringstream os;
  os.precision(3);
  const std::size_t start = h.size() > 5 ? h.size() - 5 : 0;
  for (std::size_t i = start; i < h.size(); ++i) os << (i == start ? "" : ", ") << "[" << i << "] " << h[i];
  return os.str();
}

}  // namespace

MomentConstants moment_constants(const AngularQuadrature& quad) {
  MomentConstants m;
  for (int j = 0; j < quad.size(); ++j) {
    const Direction& d = quad.node(j);
    const double w = quad.weight(j);
    const std::array<double, 2> o{d.x, d.y};
    for (int a = 0; a < 2; ++a) {
      m.mu2[a] += w * o[a] * o[a];
      m.abs1[a] += w * std::abs(o[a]);
      for (int b = 0; b < 2; ++b) m.c[a][b] += w * std::abs(o[a]) * o[b] * o[b];
    }
  }
  return m;
}

MomentSystem moment_system(const BoundOperators& bound) {
  const DiscreteOperators& ops = bound.ops();
  const MomentConstants mc = moment_constants(ops.quadrature());
  MomentSystem sys;
  sys.sigma_a = cell_to_dof(bound.sigma_a(), ops.dofs_per_cell());
  sys.sigma_t = cell_to_dof(bound.sigma_t(), ops.dofs_per_cell());
  for (int a = 0; a < 2; ++a) {
    sys.central.push_back(ops.central(a));
    sys.jump.push_back(ops.jump(a));
    sys.mu2.push_back(mc.mu2[a]);
    sys.abs1.push_back(mc.abs1[a]);
    sys.c.push_back({mc.c[a][0], mc.c[a][1]});
  }
  return sys;
}

DsaVariant parse_dsa_variant(const std::string& name) {
  if (name == "fc" || name == "fully_consistent") return DsaVariant::FullyConsistent;
  if (name == "pc" || name == "partially_consistent") return DsaVariant::PartiallyConsistent;
  throw ConfigError("unknown DSA variant '" + name + "' (expected fc or pc)");
}

std::string to_string(DsaVariant v) { return v == DsaVariant::FullyConsistent ? "fc" : "pc"; }

DsaInnerSolver parse_inner_solver(const std::string& name) {
  if (name == "direct") return DsaInnerSolver::Direct;
  if (name == "pcg") return DsaInnerSolver::Pcg;
  throw ConfigError("unknown DSA inner solver '" + name + "' (expected direct or pcg)");
}

SparseMatrix current_block(const MomentSystem& sys, int b, DsaVariant variant) {
  SparseMatrix B = diagonal(3.0 * sys.mu2[static_cast<std::size_t>(b)] * sys.sigma_t);
  if (variant == DsaVariant::FullyConsistent)
    for (int a = 0; a < sys.num_axes(); ++a)
      B += (3.0 * sys.c[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) * sys.jump[static_cast<std::size_t>(a)];
  return B;
}

Matrix dense_diffusion_operator(const MomentSystem& sys, DsaVariant variant) {
  Matrix C = Matrix(scalar_block(sys));
  for (int b = 0; b < sys.num_axes(); ++b) {
    if (!active(sys, b)) continue;
    const double m = sys.mu2[static_cast<std::size_t>(b)];
    const Matrix Cb = Matrix(sys.central[static_cast<std::size_t>(b)]);
    const Matrix B = Matrix(current_block(sys, b, variant));
    C -= (3.0 * m * m) * Cb * B.partialPivLu().solve(Cb);
  }
  return C;
}

SparseMatrix pc_diffusion_matrix(const MomentSystem& sys) {
  if (sys.sigma_t.minCoeff() <= 0.0)
    throw ConfigError("partially consistent DSA needs sigma_t > 0 everywhere");
  SparseMatrix C = scalar_block(sys);
  const SparseMatrix inv_t = diagonal(sys.sigma_t.cwiseInverse());
  for (int b = 0; b < sys.num_axes(); ++b) {
    if (!active(sys, b)) continue;
    const SparseMatrix& Cb = sys.central[static_cast<std::size_t>(b)];
    SparseMatrix term = SparseMatrix(Cb.transpose()) * inv_t * Cb;
    C += sys.mu2[static_cast<std::size_t>(b)] * term;
  }
  return C;
}

SparseMatrix mixed_moment_matrix(const MomentSystem& sys, DsaVariant variant) {
  const Eigen::Index n = sys.size();
  std::vector<int> axes;
  for (int b = 0; b < sys.num_axes(); ++b)
    if (active(sys, b)) axes.push_back(b);
  const Eigen::Index total = n * static_cast<Eigen::Index>(1 + axes.size());
  std::vector<Triplet> t;
  append_block(t, scalar_block(sys), 1.0, 0, 0);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const int b = axes[i];
    const double m = sys.mu2[static_cast<std::size_t>(b)];
    const Eigen::Index off = n * static_cast<Eigen::Index>(i + 1);
    const SparseMatrix& Cb = sys.central[static_cast<std::size_t>(b)];
    append_block(t, Cb, 3.0 * m, 0, off);
    append_block(t, Cb, m, off, 0);
    append_block(t, current_block(sys, b, variant), 1.0, off, off);
  }
  SparseMatrix M(total, total);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

CgResult conjugate_gradient(const LinearMap& A, const Vector& b, const LinearMap& M, double tol, int max_iter) {
  CgResult res;
  res.x = Vector::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    res.history.push_back(0.0);
    return res;
  }
  Vector r = b;
  Vector z = M ? M(r) : r;
  Vector p = z;
  double rz = r.dot(z);
  res.history.push_back(1.0);
  for (int k = 1; k <= max_iter; ++k) {
    const Vector Ap = A(p);
    const double curv = p.dot(Ap);
    if (!(curv > 0.0))
      throw ConfigError("CG met non-positive curvature p^T A p = " + std::to_string(curv) +
                        " at iteration " + std::to_string(k) + "; operator is not SPD");
    const double alpha = rz / curv;
    res.x += alpha * p;
    r -= alpha * Ap;
    res.iterations = k;
    res.relative_residual = r.norm() / bnorm;
    res.history.push_back(res.relative_residual);
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    z = M ? M(r) : r;
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return res;
}

LinearMap symmetric_gauss_seidel(const SparseMatrix& A) {
  auto mat = std::make_shared<SparseMatrix>(A);
  auto diag = std::make_shared<Vector>(A.diagonal());
  if (diag->minCoeff() <= 0.0) throw ConfigError("SGS preconditioner needs a positive diagonal");
  return [mat, diag](const Vector& r) -> Vector {
    Vector y = mat->triangularView<Eigen::Lower>().solve(r);
    y = diag->cwiseProduct(y);
    return mat->triangularView<Eigen::Upper>().solve(y);
  };
}

struct DsaOperator::Factorization {
  SparseMatrix pc;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  SparseMatrix mixed;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  // Mixed system with current rows scaled by -3: symmetric quasi-definite when every C_b is skew.
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> quasi;
  bool use_quasi = false;
  // PCG path
  LinearMap sgs;
  std::vector<int> axes;
  std::vector<SparseMatrix> current;
  std::vector<Vector> current_jacobi;
};

DsaOperator::DsaOperator(const BoundOperators& bound, DsaOptions opts)
    : bound_(&bound), opts_(opts), sys_(moment_system(bound)), fact_(std::make_unique<Factorization>()) {
  Factorization& f = *fact_;
  const bool pc = opts_.variant == DsaVariant::PartiallyConsistent;
  if (opts_.inner == DsaInnerSolver::Direct) {
    if (pc) {
      f.pc = pc_diffusion_matrix(sys_);
      f.ldlt.compute(f.pc);
      if (f.ldlt.info() != Eigen::Success || f.ldlt.vectorD().minCoeff() <= 0.0)
        throw ConfigError("partially consistent diffusion operator is not SPD");
    } else {
      f.mixed = mixed_moment_matrix(sys_, opts_.variant);
      f.mixed.makeCompressed();
      bool skew = true;
      for (const auto& Cb : sys_.central)
        skew = skew && SparseMatrix(Cb + SparseMatrix(Cb.transpose())).norm() <= 1e-12 * std::max(Cb.norm(), 1.0);
      if (skew) {
        Vector scale = Vector::Constant(f.mixed.rows(), -3.0);
        scale.head(sys_.size()).setOnes();
        const SparseMatrix sym = scale.asDiagonal() * f.mixed;
        f.quasi.compute(sym);
        f.use_quasi = f.quasi.info() == Eigen::Success;
        if (f.use_quasi) return;
        spdlog::warn("DSA: LDL^T of the symmetrized moment system failed; using sparse LU");
      }
      f.lu.analyzePattern(f.mixed);
      f.lu.factorize(f.mixed);
      if (f.lu.info() != Eigen::Success)
        throw NumericalError("factorization of the DSA moment system failed: " + f.lu.lastErrorMessage());
    }
    return;
  }
  f.pc = pc_diffusion_matrix(sys_);
  f.sgs = symmetric_gauss_seidel(f.pc);
  if (!pc) {
    for (int b = 0; b < sys_.num_axes(); ++b) {
      if (!active(sys_, b)) continue;
      f.axes.push_back(b);
      f.current.push_back(current_block(sys_, b, opts_.variant));
      f.current_jacobi.push_back(f.current.back().diagonal().cwiseInverse());
    }
  }
}

DsaOperator::~DsaOperator() = default;

Vector DsaOperator::solve(const Vector& rhs) const {
  const Factorization& f = *fact_;
  if (opts_.inner == DsaInnerSolver::Pcg) return solve_pcg(rhs);
  if (opts_.variant == DsaVariant::PartiallyConsistent) return f.ldlt.solve(rhs);
  Vector full = Vector::Zero(f.mixed.rows());
  full.head(rhs.size()) = rhs;
  const Vector sol = f.use_quasi ? Vector(f.quasi.solve(full)) : Vector(f.lu.solve(full));
  return sol.head(rhs.size());
}

Vector DsaOperator::solve_pcg(const Vector& rhs) const {
  const Factorization& f = *fact_;
  LinearMap op;
  if (opts_.variant == DsaVariant::PartiallyConsistent) {
    op = [&f](const Vector& x) -> Vector { return f.pc * x; };
  } else {
    // Schur complement of the mixed system; each apply solves the current blocks by Jacobi-CG.
    const SparseMatrix A00 = scalar_block(sys_);
    op = [this, &f, A00](const Vector& x) -> Vector {
      Vector y = A00 * x;
      for (std::size_t i = 0; i < f.axes.size(); ++i) {
        const auto b = static_cast<std::size_t>(f.axes[i]);
        const double m = sys_.mu2[b];
        const Vector rb = m * (sys_.central[b] * x);
        const SparseMatrix& B = f.current[i];
        const Vector& jac = f.current_jacobi[i];
        const CgResult inner = conjugate_gradient([&B](const Vector& v) -> Vector { return B * v; }, rb,
                                                  [&jac](const Vector& v) -> Vector { return jac.cwiseProduct(v); },
                                                  opts_.inner_tol * 1e-2, opts_.inner_max_iter);
        if (!inner.converged)
          throw NumericalError("DSA current-block CG did not converge in " + std::to_string(inner.iterations) +
                               " iterations; residuals " + tail(inner.history));
        y -= 3.0 * m * (sys_.central[b] * inner.x);
      }
      return y;
    };
  }
  const CgResult res = conjugate_gradient(op, rhs, f.sgs, opts_.inner_tol, opts_.inner_max_iter);
  if (!res.converged)
    throw NumericalError("DSA inner PCG did not converge in " + std::to_string(res.iterations) +
                         " iterations; residuals " + tail(res.history));
  return res.x;
}

Vector DsaOperator::correction(const Vector& r) const { return solve(bound_->apply_sigma_s(r)); }

Vector DsaOperator::apply(int, const Vector& r) { return r + correction(r); }

std::string DsaOperator::label(int) const {
  return opts_.variant == DsaVariant::FullyConsistent ? "dsa" : "pc_dsa";
}

}  // namespace rtrom
