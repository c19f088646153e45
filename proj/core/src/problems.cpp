#include "rtrom/problems.hpp"

#include <cmath>
#include <numbers>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

bool in_square(double x, double y, double x0, double x1, double y0, double y1) {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

// Four absorbing blocks around the central source of the lattice.
bool lattice_absorber(double x, double y) {
  const double lo[2] = {1.0, 3.0};
  for (double ax : lo)
    for (double ay : lo)
      if (in_square(x, y, ax, ax + 1.0, ay, ay + 1.0)) return true;
  return false;
}

bool inner_cell(double x, double y) { return std::abs(x) <= 0.5 && std::abs(y) <= 0.5; }

SpatialField indicator(bool (*pred)(double, double), bool value) {
  return [pred, value](double x, double y) { return pred(x, y) == value ? 1.0 : 0.0; };
}

SpatialField constant(double c) {
  return [c](double, double) { return c; };
}

ProblemFamily lattice(Scale scale) {
  ParameterBox box{{95.0, 0.5}, {105.0, 1.5}};
  std::vector<CrossSectionPiece> pieces{
      {"absorber", parameter_coefficient(0), {}, indicator(lattice_absorber, true)},
      {"scatterer", parameter_coefficient(1), indicator(lattice_absorber, false), {}},
  };
  std::vector<SourcePiece> sources{
      {"center", unit_coefficient(),
       [](double x, double y) { return std::abs(x - 2.5) < 0.5 && std::abs(y - 2.5) < 0.5 ? 1.0 : 0.0; }, {}},
  };
  ProblemFamily f{"lattice", Box{0.0, 5.0, 0.0, 5.0}, MaterialField(box, pieces, sources), {100.0, 1.0}, 2, 1e-8, 1e-11, {}};
  f.preset = scale == Scale::Paper ? Preset{80, 80, 1, 40, 6, {11, 11}, 10} : Preset{40, 40, 1, 16, 4, {5, 5}, 10};
  return f;
}

ProblemFamily pin_cell(Scale scale) {
  ParameterBox box{{0.05, 0.05}, {0.5, 0.5}};
  std::vector<CrossSectionPiece> pieces{
      {"inner_absorption", parameter_coefficient(0), {}, indicator(inner_cell, true)},
      {"inner_scattering", parameter_coefficient(1), indicator(inner_cell, true), {}},
      {"outer_scattering", unit_coefficient(),
       [](double x, double y) { return inner_cell(x, y) ? 0.0 : 100.0; }, {}},
  };
  std::vector<SourcePiece> sources{
      {"gaussian", unit_coefficient(), [](double x, double y) { return std::exp(-100.0 * (x * x + y * y)); }, {}},
  };
  ProblemFamily f{"pin_cell", Box{-1.0, 1.0, -1.0, 1.0}, MaterialField(box, pieces, sources), {0.275, 0.275}, 2,
                  1e-10, 1e-11, {}};
  f.preset = scale == Scale::Paper ? Preset{80, 80, 1, 30, 6, {5, 5}, 10} : Preset{32, 32, 1, 8, 4, {5, 5}, 10};
  return f;
}

ProblemFamily variable_scattering(Scale scale) {
  ParameterBox box{{49.9}, {99.9}};
  std::vector<CrossSectionPiece> pieces{
      {"ramp", parameter_coefficient(0),
       [](double x, double y) {
         const double r2 = x * x + y * y;
         if (r2 > 1.0) return 1.0;
         const double s = 2.0 - r2;
         return r2 * r2 * s * s;
       },
       {}},
      {"background", unit_coefficient(), constant(0.1), {}},
  };
  std::vector<SourcePiece> sources{
      {"gaussian", unit_coefficient(),
       [](double x, double y) { return 10.0 / std::numbers::pi * std::exp(-100.0 * (x * x + y * y)); }, {}},
  };
  ProblemFamily f{"variable_scattering", Box{-1.0, 1.0, -1.0, 1.0}, MaterialField(box, pieces, sources), {74.9}, 2,
                  1e-9, 1e-11, {}};
  f.preset = scale == Scale::Paper ? Preset{80, 80, 1, 30, 6, {51}, 10} : Preset{32, 32, 1, 8, 4, {11}, 10};
  return f;
}

ProblemFamily parametric_bc(Scale scale) {
  ParameterBox box{{1.0, 0.5}, {5.0, 1.5}};
  std::vector<CrossSectionPiece> pieces{
      {"inner_scattering", parameter_coefficient(0), indicator(inner_cell, true), {}},
      {"outer_absorption", unit_coefficient(), {}, indicator(inner_cell, false)},
  };
  std::vector<SourcePiece> sources{
      {"left_inflow", parameter_coefficient(1), {},
       [](double x, double, const Direction& d) { return x <= -1.0 + 1e-12 && d.x >= 0.0 ? 1.0 : 0.0; }},
  };
  ProblemFamily f{"parametric_bc", Box{-1.0, 1.0, -1.0, 1.0}, MaterialField(box, pieces, sources), {3.0, 1.0}, 2,
                  1e-9, 1e-11, {}};
  f.preset = scale == Scale::Paper ? Preset{64, 64, 1, 60, 6, {9, 11}, 10} : Preset{32, 32, 1, 16, 4, {5, 5}, 10};
  return f;
}

}  // namespace

Scale parse_scale(const std::string& name) {
  if (name == "paper") return Scale::Paper;
  if (name == "desk") return Scale::Desk;
  if (name == "custom") return Scale::Custom;
  throw ConfigError("unknown scale '" + name + "' (expected paper, desk or custom)");
}

std::string to_string(Scale s) {
  switch (s) {
    case Scale::Paper:
      return "paper";
    case Scale::Desk:
      return "desk";
    case Scale::Custom:
      return "custom";
  }
  return "desk";
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"lattice", "pin_cell", "variable_scattering", "parametric_bc"};
  return names;
}

ProblemFamily make_problem(const std::string& name, Scale scale) {
  if (name == "lattice") return lattice(scale);
  if (name == "pin_cell") return pin_cell(scale);
  if (name == "variable_scattering") return variable_scattering(scale);
  if (name == "parametric_bc") return parametric_bc(scale);
  std::string valid;
  for (const auto& n : problem_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown problem '" + name + "'; valid problems: " + valid);
}

DiscreteOperators discretize(const ProblemFamily& family) {
  const Preset& p = family.preset;
  return DiscreteOperators(Mesh2D(family.domain, p.nx, p.ny), p.order, build_cl_quadrature(p.n_theta, p.n_z),
                           family.material);
}

}  // namespace rtrom
