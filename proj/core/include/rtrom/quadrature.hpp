#pragma once

#include <span>
#include <utility>
#include <vector>

namespace rtrom {

struct Direction {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Gauss-Legendre rule on [-1, 1]; weights sum to 2. Nodes ascending.
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Normalized product rule on the unit sphere: a Chebyshev rule in the azimuth
/// times a Gauss-Legendre rule in Omega_z, with weights summing to one.
///
/// Node j = j2 * n_theta + j1 (zero based) has azimuth theta_{j1} =
/// (2 j1 + 1) pi / n_theta and polar cosine equal to the j2-th Gauss-Legendre
/// node.
class AngularQuadrature {
 public:
  AngularQuadrature(int n_theta, int n_z);

  int n_theta() const { return n_theta_; }
  int n_z() const { return n_z_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  const Direction& node(int j) const { return nodes_[static_cast<std::size_t>(j)]; }
  double weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }
  std::span<const Direction> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// Sum_j w_j f_j. Throws DomainError if the sample count is wrong.
  double integrate(std::span<const double> samples) const;

 private:
  int n_theta_;
  int n_z_;
  std::vector<Direction> nodes_;
  std::vector<double> weights_;
};

AngularQuadrature build_cl_quadrature(int n_theta, int n_z);

double angular_integrate(const AngularQuadrature& quad, std::span<const double> samples);

}  // namespace rtrom
