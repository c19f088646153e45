#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rtrom/quadrature.hpp"

namespace rtrom {

using Parameter = std::vector<double>;

struct ParameterBox {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const Parameter& mu, double slack = 1e-12) const;
};

using CoefficientFn = std::function<double(const Parameter&)>;
using SpatialField = std::function<double(double, double)>;
using InflowField = std::function<double(double, double, const Direction&)>;

/// One term a(mu) * (sigma_s shape, sigma_a shape) of the cross-section
/// expansion. An empty field means zero.
struct CrossSectionPiece {
  std::string name;
  CoefficientFn coefficient;
  SpatialField sigma_s;
  SpatialField sigma_a;
};

/// One term a(mu) * (G shape, inflow shape) of the source expansion.
struct SourcePiece {
  std::string name;
  CoefficientFn coefficient;
  SpatialField volume;
  InflowField inflow;
};

/// Parametric cross sections and sources in affine form:
///   sigma_s(x; mu) = sum_p a_p(mu) s_p(x),  sigma_a(x; mu) = sum_p a_p(mu) t_p(x),
///   G(x; mu) = sum_q b_q(mu) G_q(x),       g(x, Omega; mu) = sum_q b_q(mu) g_q(x, Omega).
class MaterialField {
 public:
  MaterialField(ParameterBox box, std::vector<CrossSectionPiece> pieces,
                std::vector<SourcePiece> sources);

  const ParameterBox& box() const { return box_; }
  const std::vector<CrossSectionPiece>& pieces() const { return pieces_; }
  const std::vector<SourcePiece>& sources() const { return sources_; }

  double sigma_s(double x, double y, const Parameter& mu) const;
  double sigma_a(double x, double y, const Parameter& mu) const;
  double sigma_t(double x, double y, const Parameter& mu) const { return sigma_s(x, y, mu) + sigma_a(x, y, mu); }
  double source(double x, double y, const Parameter& mu) const;
  double inflow(double x, double y, const Direction& d, const Parameter& mu) const;

 private:
  ParameterBox box_;
  std::vector<CrossSectionPiece> pieces_;
  std::vector<SourcePiece> sources_;
};

/// Constant coefficient a(mu) = 1.
CoefficientFn unit_coefficient();
/// Coefficient a(mu) = mu[i].
CoefficientFn parameter_coefficient(std::size_t i);

}  // namespace rtrom
