#include "rtrom/bench.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rtrom/errors.hpp"
#include "rtrom/transport.hpp"

namespace rtrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_box(const ParameterBox& box) {
  if (box.dim() == 0 || box.lo.size() != box.hi.size()) throw ConfigError("parameter box is empty");
  for (std::size_t d = 0; d < box.dim(); ++d)
    if (!(box.hi[d] > box.lo[d])) throw ConfigError("parameter box is degenerate in dimension " + std::to_string(d));
}

double max_distance(const Parameter& a, const Parameter& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double tps(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

double distance(const Parameter& a, const Parameter& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

std::vector<Parameter> uniform_grid(const ParameterBox& box, const std::vector<int>& points_per_axis) {
  check_box(box);
  if (points_per_axis.size() != box.dim())
    throw ConfigError("training grid has " + std::to_string(points_per_axis.size()) + " axes for a " +
                      std::to_string(box.dim()) + "-dimensional parameter box");
  std::size_t total = 1;
  for (int n : points_per_axis) {
    if (n < 1) throw ConfigError("training grid needs at least one point per axis");
    total *= static_cast<std::size_t>(n);
  }
  std::vector<Parameter> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Parameter mu(box.dim());
    std::size_t rest = flat;
    // Last axis varies fastest.
    for (std::size_t d = box.dim(); d-- > 0;) {
      const auto n = static_cast<std::size_t>(points_per_axis[d]);
      const std::size_t i = rest % n;
      rest /= n;
      mu[d] = n == 1 ? 0.5 * (box.lo[d] + box.hi[d])
                     : box.lo[d] + (box.hi[d] - box.lo[d]) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.push_back(std::move(mu));
  }
  return grid;
}

std::vector<Parameter> random_parameters(const ParameterBox& box, int count, std::uint64_t seed,
                                         const std::vector<Parameter>& exclude, double min_distance) {
  check_box(box);
  if (count < 0) throw ConfigError("negative test-set size");
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (std::size_t d = 0; d < box.dim(); ++d) dist.emplace_back(box.lo[d], box.hi[d]);
  std::vector<Parameter> out;
  while (static_cast<int>(out.size()) < count) {
    Parameter mu(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d) mu[d] = dist[d](rng);
    const bool near = std::any_of(exclude.begin(), exclude.end(),
                                  [&](const Parameter& e) { return max_distance(e, mu) <= min_distance; });
    if (!near) out.push_back(std::move(mu));
  }
  return out;
}

ParameterSets make_parameter_sets(const ProblemFamily& family, const std::vector<int>& train_grid, int n_test,
                                  std::uint64_t seed) {
  ParameterSets sets;
  sets.train = uniform_grid(family.box(), train_grid);
  sets.test = random_parameters(family.box(), n_test, seed, sets.train);
  return sets;
}

ParameterSets make_parameter_sets(const ProblemFamily& family, std::uint64_t seed) {
  return make_parameter_sets(family, family.preset.train_grid, family.preset.n_test, seed);
}

RbfInterpolator::RbfInterpolator(ParameterBox box, std::vector<Parameter> samples, std::vector<Vector> values)
    : box_(std::move(box)), samples_(std::move(samples)), values_(std::move(values)) {
  check_box(box_);
  if (samples_.empty()) throw DomainError("RBF interpolation needs at least one sample");
  if (samples_.size() != values_.size()) throw DomainError("RBF interpolation: sample and value counts differ");
  for (const auto& s : samples_) scaled_samples_.push_back(scaled(s));
  const auto n = static_cast<Eigen::Index>(samples_.size());
  if (n < 2) return;

  const auto d = static_cast<Eigen::Index>(box_.dim());
  // Linear tail needs d + 1 unisolvent points; otherwise keep only the constant.
  Matrix P(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    P(i, 0) = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) P(i, k + 1) = scaled_samples_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  tail_ = Eigen::FullPivLU<Matrix>(P).rank() == d + 1 ? static_cast<int>(d + 1) : 1;
  Matrix M = Matrix::Zero(n + tail_, n + tail_);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      M(i, j) = tps(distance(scaled_samples_[static_cast<std::size_t>(i)], scaled_samples_[static_cast<std::size_t>(j)]));
  M.topRightCorner(n, tail_) = P.leftCols(tail_);
  M.bottomLeftCorner(tail_, n) = P.leftCols(tail_).transpose();
  lu_.compute(M);
}

Parameter RbfInterpolator::scaled(const Parameter& mu) const {
  if (mu.size() != box_.dim()) throw DomainError("RBF interpolation: parameter dimension mismatch");
  Parameter s(mu.size());
  for (std::size_t d = 0; d < mu.size(); ++d) s[d] = (mu[d] - box_.lo[d]) / (box_.hi[d] - box_.lo[d]);
  return s;
}

Vector RbfInterpolator::operator()(const Parameter& mu) const {
  const Parameter x = scaled(mu);
  std::size_t nearest = 0;
  double best = distance(x, scaled_samples_[0]);
  for (std::size_t i = 1; i < scaled_samples_.size(); ++i) {
    const double di = distance(x, scaled_samples_[i]);
    if (di < best) {
      best = di;
      nearest = i;
    }
  }
  if (samples_.size() < 2 || best == 0.0) return values_[nearest];

  const auto n = static_cast<Eigen::Index>(samples_.size());
  // M is symmetric, so the cardinal weights at mu solve M a = [k(mu); p(mu)].
  Vector rhs(n + tail_);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = tps(distance(x, scaled_samples_[static_cast<std::size_t>(i)]));
  rhs(n) = 1.0;
  for (int k = 1; k < tail_; ++k) rhs(n + k) = x[static_cast<std::size_t>(k - 1)];
  const Vector a = lu_.solve(rhs);
  Vector out = Vector::Zero(values_[0].size());
  for (Eigen::Index i = 0; i < n; ++i) out += a(i) * values_[static_cast<std::size_t>(i)];
  return out;
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"si",           "si_dsa",           "si_romsad",     "gmres_dsa",
                                              "gmres_pc_dsa", "gmres_dsa_interp", "fgmres_romsad", "fgmres_dsa"};
  return names;
}

void check_method(const std::string& method) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), method) != names.end()) return;
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown method '" + method + "'; valid methods: " + valid);
}

SolveReport run_method(const std::string& method, const BoundOperators& bound, const MethodOptions& opts,
                       const MethodResources& res) {
  check_method(method);
  const TransportOperator op(bound);
  const bool needs_rom = method == "si_romsad" || method == "fgmres_romsad";
  if (needs_rom && res.basis == nullptr) throw ConfigError("method '" + method + "' needs a reduced basis");
  if (method == "gmres_dsa_interp" && res.interpolator == nullptr)
    throw ConfigError("method 'gmres_dsa_interp' needs sampled solutions to interpolate");

  const auto t0 = Clock::now();
  if (method == "si") {
    SolveReport rep = source_iteration(op, nullptr, opts.si);
    rep.method = method;
    return rep;
  }
  DsaOptions dsa_opts = opts.dsa;
  if (method == "gmres_pc_dsa") dsa_opts.variant = DsaVariant::PartiallyConsistent;
  DsaOperator dsa(bound, dsa_opts);
  std::optional<RomsadPreconditioner> romsad;
  if (needs_rom) romsad.emplace(*res.basis, bound, dsa, opts.window);
  Vector guess;
  if (method == "gmres_dsa_interp") guess = (*res.interpolator)(bound.mu());
  const double setup = seconds_since(t0);

  SolveReport rep;
  if (method == "si_dsa") {
    rep = source_iteration(op, &dsa, opts.si);
  } else if (method == "si_romsad") {
    rep = source_iteration(op, &*romsad, opts.si);
  } else if (method == "gmres_dsa" || method == "gmres_pc_dsa" || method == "gmres_dsa_interp") {
    rep = gmres_right(op, dsa, opts.krylov, guess);
  } else if (method == "fgmres_romsad") {
    rep = fgmres(op, *romsad, opts.krylov);
  } else {
    rep = fgmres(op, dsa, opts.krylov);
  }
  rep.method = method;
  rep.setup_seconds = setup;
  return rep;
}

const MethodRow& BenchmarkReport::row(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return r;
  throw DomainError("report has no row for method '" + method + "'");
}

BenchmarkReport run_comparison(const DiscreteOperators& ops, const std::vector<std::string>& methods,
                               const std::vector<Parameter>& test, const ComparisonOptions& opts,
                               const MethodResources& res) {
  if (methods.empty()) throw ConfigError("no methods to compare");
  for (const auto& m : methods) check_method(m);
  check_method(opts.baseline);
  if (test.empty()) throw ConfigError("empty test set");

  std::vector<std::string> order = methods;
  if (std::find(order.begin(), order.end(), opts.baseline) == order.end()) order.insert(order.begin(), opts.baseline);

  BenchmarkReport report;
  report.baseline = opts.baseline;
  report.test = test;
  for (const auto& m : order) report.rows.push_back({m, {}, 0, 0, 0, 0, 0, true});

  for (const Parameter& mu : test) {
    const BoundOperators bound(ops, mu);
    for (auto& row : report.rows) {
      row.runs.push_back(run_method(row.method, bound, opts.method, res));
      const SolveReport& r = row.runs.back();
      spdlog::info("{}: {} iterations, {} sweeps, R_inf {:.2e}{}", row.method, r.iterations, r.sweeps, r.r_inf,
                   r.converged ? "" : " (not converged)");
    }
  }

  const auto& base = *std::find_if(report.rows.begin(), report.rows.end(),
                                   [&](const MethodRow& r) { return r.method == opts.baseline; });
  const double n = static_cast<double>(test.size());
  for (auto& row : report.rows) {
    double rel = 0.0;
    for (std::size_t i = 0; i < row.runs.size(); ++i) {
      const SolveReport& r = row.runs[i];
      row.mean_sweeps += static_cast<double>(r.sweeps) / n;
      row.mean_iterations += r.iterations / n;
      row.mean_r_inf += r.r_inf / n;
      row.mean_seconds += r.wall_seconds / n;
      row.all_converged = row.all_converged && r.converged;
      const double tb = base.runs[i].wall_seconds;
      rel += tb > 0.0 ? r.wall_seconds / tb : 1.0;
    }
    row.t_rel = 100.0 * rel / n;
  }
  return report;
}

RbfInterpolator interpolator_from_samples(const DiscreteOperators& ops, const std::vector<Parameter>& samples,
                                          const MethodOptions& opts) {
  std::vector<Vector> values;
  for (const Parameter& mu : samples) {
    const BoundOperators bound(ops, mu);
    values.push_back(run_method("gmres_dsa", bound, opts).phi);
  }
  return RbfInterpolator(ops.material().box(), samples, std::move(values));
}

std::string report_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "method,n_sweep,T_rel,R_inf\n";
  for (const auto& row : report.rows) {
    os << row.method << (row.all_converged ? "" : "*") << "," << row.mean_sweeps << "," << row.t_rel << ","
       << std::scientific << row.mean_r_inf << std::defaultfloat << "\n";
  }
  return os.str();
}

std::string report_json(const BenchmarkReport& report) {
  using nlohmann::json;
  json j;
  j["problem"] = report.problem;
  j["scale"] = report.scale;
  j["baseline"] = report.baseline;
  j["test_parameters"] = report.test;
  j["basis_size"] = report.basis_size;
  j["sampled"] = report.sampled;
  if (report.offline) {
    const auto& t = *report.offline;
    j["offline"] = {{"step1", t.step1},   {"step2a", t.step2a}, {"step2b", t.step2b},
                    {"step2c", t.step2c}, {"step3", t.step3},   {"total", t.total},
                    {"all_snapshots", t.all_snapshots}};
  }
  j["methods"] = json::array();
  for (const auto& row : report.rows) {
    json m;
    m["method"] = row.method;
    m["n_sweep"] = row.mean_sweeps;
    m["n_iter"] = row.mean_iterations;
    m["T_rel"] = row.t_rel;
    m["R_inf"] = row.mean_r_inf;
    m["mean_seconds"] = row.mean_seconds;
    m["converged"] = row.all_converged;
    m["runs"] = json::array();
    for (std::size_t i = 0; i < row.runs.size(); ++i) {
      const SolveReport& r = row.runs[i];
      m["runs"].push_back({{"mu", report.test[i]},
                           {"iterations", r.iterations},
                           {"sweeps", r.sweeps},
                           {"R_inf", r.r_inf},
                           {"seconds", r.wall_seconds},
                           {"setup_seconds", r.setup_seconds},
                           {"converged", r.converged},
                           {"residual_history", r.residual_history},
                           {"preconditioner_trace", r.preconditioner_trace}});
    }
    j["methods"].push_back(std::move(m));
  }
  if (!report.config_json.empty()) j["config"] = json::parse(report.config_json);
  return j.dump(2);
}

void export_report(const BenchmarkReport& report, const std::string& format, const std::string& path) {
  std::string text;
  if (format == "csv") {
    text = report_csv(report);
  } else if (format == "json") {
    text = report_json(report);
  } else {
    throw ConfigError("unknown export format '" + format + "' (expected csv or json)");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report to " + path);
  out << text;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("pearson: need two samples of equal length >= 2");
  const Eigen::Map<const Vector> x(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Vector> y(b.data(), static_cast<Eigen::Index>(b.size()));
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  const double den = dx.norm() * dy.norm();
  return den > 0.0 ? dx.dot(dy) / den : 0.0;
}

}  // namespace rtrom
