#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtrom/bench.hpp"
#include "rtrom/problems.hpp"
#include "rtrom/rom.hpp"

namespace rtrom {

/// Run configuration, read from a JSON file with sections
/// problem, mesh, quadrature, solver, dsa, rom and bench.
/// Unset optional fields fall back to the problem family preset.
struct RunConfig {
  // problem
  std::string problem = "lattice";
  Scale scale = Scale::Desk;
  // mesh
  std::optional<int> nx;
  std::optional<int> ny;
  std::optional<int> order;
  // quadrature
  std::optional<int> n_theta;
  std::optional<int> n_z;
  // solver
  double tol = 1e-11;
  int max_iter = 200;
  int si_max_iter = 1000;
  bool reorthogonalize = false;
  std::size_t oracle_cap = 20000;
  // dsa
  DsaOptions dsa{};
  // rom
  std::optional<int> window;
  std::optional<double> eps_rom;
  int max_greedy = 50;
  std::optional<Parameter> initial_sample;
  bool prenormalize = true;
  double eps_qr = 1e-13;
  // bench
  std::vector<std::string> methods{"gmres_dsa", "fgmres_romsad"};
  std::string baseline = "gmres_dsa";
  std::uint64_t seed = 20240601;
  std::optional<int> n_test;
  std::optional<std::vector<int>> train_grid;
  bool measure_all_snapshots = false;
};

/// Parses JSON text. Unknown sections or keys and ill-typed values throw ConfigError.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

/// Family with the configured scale and mesh/quadrature overrides applied.
ProblemFamily configured_problem(const RunConfig& cfg);
MethodOptions method_options(const RunConfig& cfg, const ProblemFamily& family);
/// Greedy options; the initial sample is located in `train` (ConfigError if absent).
GreedyOptions greedy_options(const RunConfig& cfg, const ProblemFamily& family, const std::vector<Parameter>& train);
ParameterSets parameter_sets(const RunConfig& cfg, const ProblemFamily& family);

}  // namespace rtrom
