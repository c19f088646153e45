#pragma once

#include <atomic>
#include <vector>

#include "rtrom/discretization.hpp"
#include "rtrom/linalg.hpp"

namespace rtrom {

/// Matrix-free transport sweeps at a bound parameter, and the operators of the
/// scalar-flux formulation
///   T = sum_j w_j (D_j + Sigma_t)^{-1},  A~ = I - T Sigma_s,  b~ = sum_j w_j (D_j + Sigma_t)^{-1} G~_j.
///
/// The inverse cell blocks (L_j + sigma_t I)^{-1} are cached per direction and
/// distinct sigma_t value. The bound operators must outlive this object.
///
/// Cost accounting: one transport sweep is one pass over all directions.
/// Counters are updated by every public apply; `sweep_direction` alone counts
/// a single direction.
class TransportOperator {
 public:
  explicit TransportOperator(const BoundOperators& bound);

  const BoundOperators& bound() const { return *bound_; }
  const DiscreteOperators& ops() const { return bound_->ops(); }
  int num_directions() const { return ops().num_directions(); }
  int num_dofs() const { return ops().num_dofs(); }

  /// psi = (D_j + Sigma_t)^{-1} rhs.
  void sweep(int j, const Vector& rhs, Vector& psi) const;
  Vector sweep_direction(int j, const Vector& rhs) const;

  /// T rho: one transport sweep.
  Vector apply_T(const Vector& rho) const;
  /// (I - T Sigma_s) phi: one transport sweep.
  Vector apply_A_tilde(const Vector& phi) const;
  /// b~: one transport sweep.
  Vector rhs_tilde() const;
  /// All direction fluxes (D_j + Sigma_t)^{-1} rhs stacked by direction: one transport sweep.
  Vector sweep_all(const Vector& rhs) const;

  /// (D_j + Sigma_t) x, no sweep.
  Vector apply_direction_operator(int j, const Vector& x) const;

  /// Completed transport sweeps (direction sweeps / N_Omega).
  long transport_sweeps() const { return direction_sweeps_.load() / num_directions(); }
  long direction_sweeps() const { return direction_sweeps_.load(); }
  void reset_counters() const { direction_sweeps_.store(0); }

 private:
  void sweep_impl(int j, const double* rhs, double* psi) const;
  template <typename RhsFn>
  Vector weighted_sweep_sum(RhsFn&& rhs_for) const;

  const BoundOperators* bound_;
  int nk_;
  std::vector<int> cell_sigma_index_;
  // inverses_[j * n_sigma + s] is a row-major nk x nk block.
  std::vector<std::vector<double>> inverses_;
  std::vector<std::vector<double>> inflow_blocks_;  // per direction, row-major, concatenated
  std::vector<std::vector<Face>> inflow_faces_;
  std::vector<int> order_x_sign_;
  std::vector<int> order_y_sign_;
  int n_sigma_ = 0;
  mutable std::atomic<long> direction_sweeps_{0};
};

/// phi = sum_j w_j psi_j for a direction-stacked angular flux.
Vector integrate_angular_flux(const AngularQuadrature& quad, const Vector& psi);

}  // namespace rtrom
