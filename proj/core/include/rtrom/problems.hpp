#pragma once

#include <string>
#include <vector>

#include "rtrom/discretization.hpp"
#include "rtrom/material.hpp"
#include "rtrom/mesh.hpp"

namespace rtrom {

enum class Scale { Paper, Desk, Custom };

Scale parse_scale(const std::string& name);
std::string to_string(Scale s);

/// Mesh, quadrature and training/test sizes of one problem scale.
struct Preset {
  int nx = 0;
  int ny = 0;
  int order = 1;
  int n_theta = 0;
  int n_z = 0;
  /// Points per parameter axis of the uniform training grid.
  std::vector<int> train_grid;
  int n_test = 10;
};

/// One of the benchmark families, with its parametric material and greedy defaults.
struct ProblemFamily {
  std::string name;
  Box domain;
  MaterialField material;
  Parameter initial_sample;
  int window = 2;
  double eps_rom = 1e-9;
  double tol = 1e-11;
  Preset preset;

  const ParameterBox& box() const { return material.box(); }
};

/// Valid family names.
const std::vector<std::string>& problem_names();

/// Builds a family with the preset of the given scale. `Custom` starts from the desk preset.
/// Unknown names throw ConfigError listing the valid ones.
ProblemFamily make_problem(const std::string& name, Scale scale = Scale::Desk);

/// Assembles the parameter-independent operators of a family at its preset.
DiscreteOperators discretize(const ProblemFamily& family);

}  // namespace rtrom
