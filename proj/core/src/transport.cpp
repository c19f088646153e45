#include "rtrom/transport.hpp"

#include <map>
#include <string>

#include <Eigen/LU>

#ifdef RTROM_HAVE_OPENMP
#include <omp.h>
#endif

#include "rtrom/errors.hpp"

namespace rtrom {

TransportOperator::TransportOperator(const BoundOperators& bound)
    : bound_(&bound), nk_(bound.ops().dofs_per_cell()) {
  const auto& ops = bound.ops();
  const int nc = ops.num_cells();
  const int nd = ops.num_directions();

  std::map<double, int> sigma_index;
  for (int c = 0; c < nc; ++c) sigma_index.emplace(bound.sigma_t()(c), 0);
  int next = 0;
  for (auto& [value, idx] : sigma_index) idx = next++;
  n_sigma_ = next;
  cell_sigma_index_.resize(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) cell_sigma_index_[static_cast<std::size_t>(c)] = sigma_index.at(bound.sigma_t()(c));

  inverses_.resize(static_cast<std::size_t>(nd) * static_cast<std::size_t>(n_sigma_));
  inflow_blocks_.resize(static_cast<std::size_t>(nd));
  inflow_faces_.resize(static_cast<std::size_t>(nd));
  order_x_sign_.resize(static_cast<std::size_t>(nd));
  order_y_sign_.resize(static_cast<std::size_t>(nd));
  for (int j = 0; j < nd; ++j) {
    const Matrix& block = ops.local_block(j);
    for (const auto& [sigma, s] : sigma_index) {
      Matrix m = block;
      m.diagonal().array() += sigma;
      Eigen::FullPivLU<Matrix> lu(m);
      if (!lu.isInvertible()) {
        int bad = 0;
        while (cell_sigma_index_[static_cast<std::size_t>(bad)] != s) ++bad;
        throw NumericalError("singular sweep block in cell " + std::to_string(bad) + " for direction " +
                             std::to_string(j) + " (sigma_t = " + std::to_string(sigma) + ")");
      }
      const Matrix inv = lu.inverse();
      auto& dst = inverses_[static_cast<std::size_t>(j * n_sigma_ + s)];
      dst.resize(static_cast<std::size_t>(nk_ * nk_));
      for (int r = 0; r < nk_; ++r)
        for (int c = 0; c < nk_; ++c) dst[static_cast<std::size_t>(r * nk_ + c)] = inv(r, c);
    }
    for (const auto& in : ops.inflow_couplings(j)) {
      inflow_faces_[static_cast<std::size_t>(j)].push_back(in.face);
      for (int r = 0; r < nk_; ++r)
        for (int c = 0; c < nk_; ++c) inflow_blocks_[static_cast<std::size_t>(j)].push_back(in.block(r, c));
    }
    const Direction& d = ops.quadrature().node(j);
    order_x_sign_[static_cast<std::size_t>(j)] = d.x >= 0.0 ? 1 : -1;
    order_y_sign_[static_cast<std::size_t>(j)] = d.y >= 0.0 ? 1 : -1;
  }
}

void TransportOperator::sweep_impl(int j, const double* rhs, double* psi) const {
  const auto& mesh = ops().mesh();
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  const int nk = nk_;
  const auto uj = static_cast<std::size_t>(j);
  const auto& faces = inflow_faces_[uj];
  const double* blocks = inflow_blocks_[uj].data();
  const std::size_t nfaces = faces.size();
  const int sx = order_x_sign_[uj];
  const int sy = order_y_sign_[uj];

  double tmp[64];
  std::vector<double> heap;
  double* t = tmp;
  if (nk > 64) {
    heap.resize(static_cast<std::size_t>(nk));
    t = heap.data();
  }

  for (int b = 0; b < ny; ++b) {
    const int iy = sy > 0 ? b : ny - 1 - b;
    for (int a = 0; a < nx; ++a) {
      const int ix = sx > 0 ? a : nx - 1 - a;
      const int c = ix + nx * iy;
      const double* r = rhs + static_cast<std::ptrdiff_t>(c) * nk;
      for (int k = 0; k < nk; ++k) t[k] = r[k];
      for (std::size_t f = 0; f < nfaces; ++f) {
        const int nb = mesh.neighbor(c, faces[f]);
        if (nb < 0) continue;
        const double* blk = blocks + f * static_cast<std::size_t>(nk * nk);
        const double* pn = psi + static_cast<std::ptrdiff_t>(nb) * nk;
        for (int k = 0; k < nk; ++k) {
          double s = 0.0;
          for (int l = 0; l < nk; ++l) s += blk[k * nk + l] * pn[l];
          t[k] -= s;
        }
      }
      const double* inv =
          inverses_[static_cast<std::size_t>(j * n_sigma_ + cell_sigma_index_[static_cast<std::size_t>(c)])].data();
      double* out = psi + static_cast<std::ptrdiff_t>(c) * nk;
      for (int k = 0; k < nk; ++k) {
        double s = 0.0;
        for (int l = 0; l < nk; ++l) s += inv[k * nk + l] * t[l];
        out[k] = s;
      }
    }
  }
}

void TransportOperator::sweep(int j, const Vector& rhs, Vector& psi) const {
  if (rhs.size() != num_dofs()) {
    throw DomainError("sweep: rhs has length " + std::to_string(rhs.size()) + ", expected " +
                      std::to_string(num_dofs()));
  }
  if (j < 0 || j >= num_directions()) throw DomainError("sweep: direction index out of range");
  psi.resize(num_dofs());
  sweep_impl(j, rhs.data(), psi.data());
  direction_sweeps_.fetch_add(1);
}

Vector TransportOperator::sweep_direction(int j, const Vector& rhs) const {
  Vector psi;
  sweep(j, rhs, psi);
  return psi;
}

template <typename RhsFn>
Vector TransportOperator::weighted_sweep_sum(RhsFn&& rhs_for) const {
  const int nd = num_directions();
  const int n = num_dofs();
  const auto& quad = ops().quadrature();
  Vector out = Vector::Zero(n);
#ifdef RTROM_HAVE_OPENMP
  if (omp_get_max_threads() > 1) {
    // Sweep directions concurrently, then reduce in index order so the result
    // does not depend on the thread count.
    Matrix buffer(n, nd);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < nd; ++j) {
      const Vector rhs = rhs_for(j);
      sweep_impl(j, rhs.data(), buffer.col(j).data());
    }
    for (int j = 0; j < nd; ++j) out += quad.weight(j) * buffer.col(j);
    direction_sweeps_.fetch_add(nd);
    return out;
  }
#endif
  Vector psi(n);
  for (int j = 0; j < nd; ++j) {
    const Vector& rhs = rhs_for(j);
    sweep_impl(j, rhs.data(), psi.data());
    out += quad.weight(j) * psi;
  }
  direction_sweeps_.fetch_add(nd);
  return out;
}

Vector TransportOperator::apply_T(const Vector& rho) const {
  if (rho.size() != num_dofs()) throw DomainError("apply_T: vector length mismatch");
  return weighted_sweep_sum([&](int) -> const Vector& { return rho; });
}

Vector TransportOperator::apply_A_tilde(const Vector& phi) const {
  return phi - apply_T(bound_->apply_sigma_s(phi));
}

Vector TransportOperator::rhs_tilde() const {
  return weighted_sweep_sum([&](int j) { return bound_->source_tilde(j); });
}

Vector TransportOperator::sweep_all(const Vector& rhs) const {
  if (rhs.size() != num_dofs()) throw DomainError("sweep_all: vector length mismatch");
  const int nd = num_directions();
  const int n = num_dofs();
  Vector psi(static_cast<Eigen::Index>(nd) * n);
#ifdef RTROM_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (omp_get_max_threads() > 1)
#endif
  for (int j = 0; j < nd; ++j) sweep_impl(j, rhs.data(), psi.data() + static_cast<std::ptrdiff_t>(j) * n);
  direction_sweeps_.fetch_add(nd);
  return psi;
}

Vector TransportOperator::apply_direction_operator(int j, const Vector& x) const {
  Vector y;
  ops().apply_advection(j, x, y);
  y += bound_->apply_sigma_t(x);
  return y;
}

Vector integrate_angular_flux(const AngularQuadrature& quad, const Vector& psi) {
  const int nd = quad.size();
  if (nd == 0 || psi.size() % nd != 0) {
    throw DomainError("integrate_angular_flux: length " + std::to_string(psi.size()) +
                      " is not a multiple of the direction count " + std::to_string(nd));
  }
  const Eigen::Index n = psi.size() / nd;
  Vector phi = Vector::Zero(n);
  for (int j = 0; j < nd; ++j) phi += quad.weight(j) * psi.segment(j * n, n);
  return phi;
}

}  // namespace rtrom
