#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtrom/dsa.hpp"
#include "rtrom/problems.hpp"
#include "rtrom/rom.hpp"
#include "rtrom/solvers.hpp"

namespace rtrom {

/// Uniform tensor grid over the box; an axis with one point uses its midpoint.
/// Throws ConfigError for a degenerate box or a zero point count.
std::vector<Parameter> uniform_grid(const ParameterBox& box, const std::vector<int>& points_per_axis);

/// `count` points drawn uniformly in the box from mt19937_64(seed), rejecting any
/// within `min_distance` (max norm) of an excluded point.
std::vector<Parameter> random_parameters(const ParameterBox& box, int count, std::uint64_t seed,
                                         const std::vector<Parameter>& exclude, double min_distance = 1e-9);

struct ParameterSets {
  std::vector<Parameter> train;
  std::vector<Parameter> test;
};

ParameterSets make_parameter_sets(const ProblemFamily& family, const std::vector<int>& train_grid, int n_test,
                                  std::uint64_t seed);
/// Sets from the family preset.
ParameterSets make_parameter_sets(const ProblemFamily& family, std::uint64_t seed);

/// Thin-plate spline interpolation r^2 log r with a linear tail, on parameters
/// scaled to the unit box. Fewer than two samples fall back to the nearest sample;
/// too few points for the linear tail fall back to a constant tail.
class RbfInterpolator {
 public:
  RbfInterpolator(ParameterBox box, std::vector<Parameter> samples, std::vector<Vector> values);

  Vector operator()(const Parameter& mu) const;
  std::size_t size() const { return samples_.size(); }

 private:
  Parameter scaled(const Parameter& mu) const;

  ParameterBox box_;
  std::vector<Parameter> samples_;
  std::vector<Parameter> scaled_samples_;
  std::vector<Vector> values_;
  int tail_ = 0;  // number of polynomial tail terms
  Eigen::PartialPivLU<Matrix> lu_;
};

/// Valid method names.
const std::vector<std::string>& method_names();
/// Throws ConfigError listing the valid names.
void check_method(const std::string& method);

struct MethodOptions {
  KrylovOptions krylov{};
  SiOptions si{};
  DsaOptions dsa{};
  int window = 2;
};

/// Optional inputs some methods need.
struct MethodResources {
  const ReducedBasis* basis = nullptr;
  const RbfInterpolator* interpolator = nullptr;
};

/// Solves at one parameter with a named method. The report's wall time covers the
/// iterative solve; preconditioner setup is reported separately.
SolveReport run_method(const std::string& method, const BoundOperators& bound, const MethodOptions& opts,
                       const MethodResources& res = {});

struct MethodRow {
  std::string method;
  std::vector<SolveReport> runs;
  double mean_sweeps = 0.0;
  double mean_iterations = 0.0;
  /// Mean over parameters of wall time relative to the baseline, in percent.
  double t_rel = 0.0;
  double mean_r_inf = 0.0;
  double mean_seconds = 0.0;
  bool all_converged = true;
};

struct BenchmarkReport {
  std::string problem;
  std::string scale;
  std::string baseline;
  std::vector<Parameter> test;
  std::vector<MethodRow> rows;
  std::optional<GreedyTimings> offline;
  int basis_size = 0;
  std::size_t sampled = 0;
  std::string config_json;

  const MethodRow& row(const std::string& method) const;
};

struct ComparisonOptions {
  MethodOptions method{};
  std::string baseline = "gmres_dsa";
};

/// Runs each method on every test parameter and aggregates sweeps, relative time and residuals.
/// The baseline is run too if it is not among `methods`.
BenchmarkReport run_comparison(const DiscreteOperators& ops, const std::vector<std::string>& methods,
                               const std::vector<Parameter>& test, const ComparisonOptions& opts,
                               const MethodResources& res = {});

/// High-fidelity GMRES-DSA solutions at the basis samples, for the interpolated-guess baseline.
RbfInterpolator interpolator_from_samples(const DiscreteOperators& ops, const std::vector<Parameter>& samples,
                                          const MethodOptions& opts);

/// Header: method,n_sweep,T_rel,R_inf. Rows with a non-converged run get a trailing '*' on the method.
std::string report_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report);
void export_report(const BenchmarkReport& report, const std::string& format, const std::string& path);

/// Pearson correlation of two equally long samples.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rtrom
