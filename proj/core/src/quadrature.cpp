#include "rtrom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

// P_n(z) and P_{n-1}(z) by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double z) {
  double p0 = 1.0;
  double p1 = z;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node, got " + std::to_string(n));
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> x(un);
  std::vector<double> w(un);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi guess for the i-th largest root, then Newton.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, pm1] = legendre_pair(n, z);
      const double dp = n * (z * p - pm1) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const auto [p, pm1] = legendre_pair(n, z);
    const double dp = n * (z * p - pm1) / (z * z - 1.0);
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const auto lo = static_cast<std::size_t>(i);
    x[hi] = z;
    x[lo] = -z;
    w[hi] = wi;
    w[lo] = wi;
  }
  if (n % 2 == 1) x[un / 2] = 0.0;
  return {x, w};
}

AngularQuadrature::AngularQuadrature(int n_theta, int n_z) : n_theta_(n_theta), n_z_(n_z) {
  if (n_theta < 1 || n_z < 1) {
    throw DomainError("CL quadrature needs n_theta >= 1 and n_z >= 1, got (" +
                      std::to_string(n_theta) + ", " + std::to_string(n_z) + ")");
  }
  auto [zs, wz] = gauss_legendre(n_z);
  double wz_sum = 0.0;
  for (double v : wz) wz_sum += v;

  nodes_.reserve(static_cast<std::size_t>(n_theta * n_z));
  weights_.reserve(static_cast<std::size_t>(n_theta * n_z));
  for (int j2 = 0; j2 < n_z; ++j2) {
    const double z = zs[static_cast<std::size_t>(j2)];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double w2 = wz[static_cast<std::size_t>(j2)] / wz_sum;
    for (int j1 = 0; j1 < n_theta; ++j1) {
      const double theta = (2.0 * j1 + 1.0) * std::numbers::pi / n_theta;
      Direction d{std::cos(theta) * s, std::sin(theta) * s, z};
      // Exact zeros keep sweep ordering and tangency checks clean.
      if (std::abs(d.x) < 1e-15) d.x = 0.0;
      if (std::abs(d.y) < 1e-15) d.y = 0.0;
      nodes_.push_back(d);
      weights_.push_back(w2 / n_theta);
    }
  }
}

double AngularQuadrature::integrate(std::span<const double> samples) const {
  if (samples.size() != weights_.size()) {
    throw DomainError("angular_integrate: expected " + std::to_string(weights_.size()) +
                      " samples, got " + std::to_string(samples.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) sum += weights_[j] * samples[j];
  return sum;
}

AngularQuadrature build_cl_quadrature(int n_theta, int n_z) { return AngularQuadrature(n_theta, n_z); }

double angular_integrate(const AngularQuadrature& quad, std::span<const double> samples) {
  return quad.integrate(samples);
}

}  // namespace rtrom
