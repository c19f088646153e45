#include "rtrom/material.hpp"

#include <algorithm>
#include <string>

#include "rtrom/errors.hpp"

namespace rtrom {

bool ParameterBox::contains(const Parameter& mu, double slack) const {
  if (mu.size() != lo.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double pad = slack * std::max(1.0, hi[i] - lo[i]);
    if (mu[i] < lo[i] - pad || mu[i] > hi[i] + pad) return false;
  }
  return true;
}

MaterialField::MaterialField(ParameterBox box, std::vector<CrossSectionPiece> pieces,
                             std::vector<SourcePiece> sources)
    : box_(std::move(box)), pieces_(std::move(pieces)), sources_(std::move(sources)) {
  if (box_.lo.size() != box_.hi.size()) throw ConfigError("MaterialField: parameter box bounds differ in size");
  for (std::size_t i = 0; i < box_.lo.size(); ++i) {
    if (!(box_.hi[i] >= box_.lo[i])) {
      throw ConfigError("MaterialField: inverted parameter box in dimension " + std::to_string(i));
    }
  }
  for (const auto& p : pieces_) {
    if (!p.coefficient) throw ConfigError("MaterialField: piece '" + p.name + "' has no coefficient");
  }
  for (const auto& s : sources_) {
    if (!s.coefficient) throw ConfigError("MaterialField: source '" + s.name + "' has no coefficient");
  }
}

double MaterialField::sigma_s(double x, double y, const Parameter& mu) const {
  double v = 0.0;
  for (const auto& p : pieces_) {
    if (p.sigma_s) v += p.coefficient(mu) * p.sigma_s(x, y);
  }
  return v;
}

double MaterialField::sigma_a(double x, double y, const Parameter& mu) const {
  double v = 0.0;
  for (const auto& p : pieces_) {
    if (p.sigma_a) v += p.coefficient(mu) * p.sigma_a(x, y);
  }
  return v;
}

double MaterialField::source(double x, double y, const Parameter& mu) const {
  double v = 0.0;
  for (const auto& s : sources_) {
    if (s.volume) v += s.coefficient(mu) * s.volume(x, y);
  }
  return v;
}

double MaterialField::inflow(double x, double y, const Direction& d, const Parameter& mu) const {
  double v = 0.0;
  for (const auto& s : sources_) {
    if (s.inflow) v += s.coefficient(mu) * s.inflow(x, y, d);
  }
  return v;
}

CoefficientFn unit_coefficient() {
  return [](const Parameter&) { return 1.0; };
}

CoefficientFn parameter_coefficient(std::size_t i) {
  return [i](const Parameter& mu) {
    if (i >= mu.size()) {
      throw DomainError("parameter index " + std::to_string(i) + " out of range for a " +
                        std::to_string(mu.size()) + "-dimensional parameter");
    }
    return mu[i];
  };
}

}  // namespace rtrom
