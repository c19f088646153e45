// Command line front end: assemble, solve, train, eval, report.
#include <CLI/CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rtrom/bench.hpp"
#include "rtrom/config.hpp"
#include "rtrom/errors.hpp"
#include "rtrom/problems.hpp"
#include "rtrom/rom.hpp"
#include "rtrom/transport.hpp"

using namespace rtrom;

namespace {

struct CommonFlags {
  std::string config;
  std::string problem;
  std::string scale;
  std::string basis;
  std::string out;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::vector<double> mu;
  std::string input;
  bool verbose = false;
};

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.problem.empty()) cfg.problem = f.problem;
  if (!f.scale.empty()) cfg.scale = parse_scale(f.scale);
  if (!f.methods.empty()) {
    for (const auto& m : f.methods) check_method(m);
    cfg.methods = f.methods;
  }
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::string format_mu(const Parameter& mu) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? ", " : "") << mu[i];
  os << ")";
  return os.str();
}

int cmd_assemble(const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const ProblemFamily family = configured_problem(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteOperators ops = discretize(family);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json j = {{"problem", family.name},
                      {"scale", to_string(cfg.scale)},
                      {"nx", family.preset.nx},
                      {"ny", family.preset.ny},
                      {"order", family.preset.order},
                      {"n_theta", family.preset.n_theta},
                      {"n_z", family.preset.n_z},
                      {"directions", ops.num_directions()},
                      {"dofs", ops.num_dofs()},
                      {"affine_pieces", ops.num_pieces()},
                      {"hash", ops.hash()},
                      {"assembly_seconds", secs}};
  std::printf("%s (%s): %dx%d mesh, K=%d, CL(%d,%d), %d directions, %d DOFs, %d affine pieces, %.3f s\n",
              family.name.c_str(), to_string(cfg.scale).c_str(), family.preset.nx, family.preset.ny,
              family.preset.order, family.preset.n_theta, family.preset.n_z, ops.num_directions(), ops.num_dofs(),
              ops.num_pieces(), secs);
  if (!f.out.empty()) write_text(f.out, j.dump(2));
  return 0;
}

int cmd_solve(const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const ProblemFamily family = configured_problem(cfg);
  const DiscreteOperators ops = discretize(family);
  const Parameter mu = f.mu.empty() ? family.initial_sample : Parameter(f.mu.begin(), f.mu.end());
  const std::string method = f.methods.empty() ? "gmres_dsa" : f.methods.front();
  std::optional<ReducedBasis> basis;
  if (!f.basis.empty()) basis = load_basis(f.basis, ops);
  MethodResources res;
  if (basis) res.basis = &*basis;
  const MethodOptions mopts = method_options(cfg, family);
  std::optional<RbfInterpolator> interp;
  if (method == "gmres_dsa_interp") {
    if (!basis) throw ConfigError("gmres_dsa_interp needs --basis for its sampled parameters");
    interp.emplace(interpolator_from_samples(ops, basis->samples, mopts));
    res.interpolator = &*interp;
  }
  const BoundOperators bound(ops, mu);
  const SolveReport rep = run_method(method, bound, mopts, res);
  std::printf("%s at mu=%s: %s in %d iterations, %ld sweeps, R_inf %.3e, %.3f s\n", method.c_str(),
              format_mu(mu).c_str(), rep.converged ? "converged" : "NOT converged", rep.iterations, rep.sweeps,
              rep.r_inf, rep.wall_seconds);
  if (!f.out.empty()) {
    nlohmann::json j = {{"method", method},
                        {"mu", mu},
                        {"iterations", rep.iterations},
                        {"sweeps", rep.sweeps},
                        {"R_inf", rep.r_inf},
                        {"seconds", rep.wall_seconds},
                        {"converged", rep.converged},
                        {"residual_history", rep.residual_history},
                        {"preconditioner_trace", rep.preconditioner_trace},
                        {"phi", std::vector<double>(rep.phi.data(), rep.phi.data() + rep.phi.size())}};
    write_text(f.out, j.dump(2));
  }
  return rep.converged ? 0 : 2;
}

int cmd_train(const CommonFlags& f) {
  if (f.out.empty()) throw ConfigError("train needs --out <basis file>");
  const RunConfig cfg = resolve_config(f);
  const ProblemFamily family = configured_problem(cfg);
  const DiscreteOperators ops = discretize(family);
  const ParameterSets sets = parameter_sets(cfg, family);
  const GreedyOptions gopts = greedy_options(cfg, family, sets.train);
  const GreedyResult res = greedy_train(ops, sets.train, gopts);
  save_basis(res.basis, f.out);
  const GreedyTimings& t = res.timings;
  std::printf("sampled %zu of %zu training parameters, r = %d, %s\n", res.sampled.size(), sets.train.size(),
              res.basis.size(), res.converged ? "converged" : "stopped at max_greedy");
  std::printf("T_greedy %.3f s (step1 %.3f, step2a %.3f, step2b %.3f, step2c %.3f, step3 %.3f)\n", t.total, t.step1,
              t.step2a, t.step2b, t.step2c, t.step3);
  if (t.all_snapshots >= 0.0)
    std::printf("T_AllSnap %.3f s, ratio %.2f\n", t.all_snapshots, t.all_snapshots / t.total);
  return 0;
}

int cmd_eval(const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const ProblemFamily family = configured_problem(cfg);
  const DiscreteOperators ops = discretize(family);
  const ParameterSets sets = parameter_sets(cfg, family);
  const MethodOptions mopts = method_options(cfg, family);

  std::optional<ReducedBasis> basis;
  std::optional<GreedyTimings> offline;
  std::size_t sampled = 0;
  const bool needs_basis = std::any_of(cfg.methods.begin(), cfg.methods.end(), [](const std::string& m) {
    return m == "fgmres_romsad" || m == "si_romsad" || m == "gmres_dsa_interp";
  });
  if (!f.basis.empty()) {
    basis = load_basis(f.basis, ops);
    sampled = basis->samples.size();
  } else if (needs_basis) {
    spdlog::info("no --basis given; training one on {} parameters", sets.train.size());
    GreedyResult g = greedy_train(ops, sets.train, greedy_options(cfg, family, sets.train));
    offline = g.timings;
    sampled = g.sampled.size();
    basis = std::move(g.basis);
  }
  MethodResources res;
  if (basis) res.basis = &*basis;
  std::optional<RbfInterpolator> interp;
  if (std::find(cfg.methods.begin(), cfg.methods.end(), "gmres_dsa_interp") != cfg.methods.end()) {
    interp.emplace(interpolator_from_samples(ops, basis->samples, mopts));
    res.interpolator = &*interp;
  }
  ComparisonOptions copts;
  copts.method = mopts;
  copts.baseline = cfg.baseline;
  BenchmarkReport report = run_comparison(ops, cfg.methods, sets.test, copts, res);
  report.problem = family.name;
  report.scale = to_string(cfg.scale);
  report.offline = offline;
  report.basis_size = basis ? basis->size() : 0;
  report.sampled = sampled;
  report.config_json = config_to_json(cfg);
  std::cout << report_csv(report);
  if (!f.out.empty()) export_report(report, ends_with(f.out, ".csv") ? "csv" : "json", f.out);
  return 0;
}

int cmd_report(const CommonFlags& f) {
  if (f.input.empty()) throw ConfigError("report needs --in <report.json>");
  std::ifstream in(f.input);
  if (!in) throw ConfigError("cannot open " + f.input);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: not a JSON report: ") + e.what());
  }
  std::ostringstream csv;
  csv << "method,n_sweep,T_rel,R_inf\n";
  for (const auto& m : j.at("methods")) {
    csv << m.at("method").get<std::string>() << (m.at("converged").get<bool>() ? "" : "*") << ","
        << m.at("n_sweep").get<double>() << "," << m.at("T_rel").get<double>() << "," << m.at("R_inf").get<double>()
        << "\n";
  }
  std::cout << csv.str();
  if (j.contains("offline")) {
    const auto& o = j.at("offline");
    std::printf("T_greedy %.3f s, T_AllSnap %.3f s\n", o.at("total").get<double>(), o.at("all_snapshots").get<double>());
  }
  if (!f.out.empty()) write_text(f.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric radiative transfer solvers with DSA and ROMSAD preconditioning"};
  app.require_subcommand(1);
  CommonFlags flags;

  std::string method_help = "solver method; one of:";
  for (const auto& m : method_names()) method_help += " " + m;
  std::string problem_help = "problem family; one of:";
  for (const auto& p : problem_names()) problem_help += " " + p;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--problem", flags.problem, problem_help);
    sub->add_option("--scale", flags.scale, "paper, desk or custom");
    sub->add_option("--seed", flags.seed, "test-set seed");
    sub->add_flag("-v,--verbose", flags.verbose, "log progress");
  };

  auto* assemble = app.add_subcommand("assemble", "assemble the discretization and print its size");
  add_common(assemble);
  assemble->add_option("--out", flags.out, "write a JSON summary");

  auto* solve = app.add_subcommand("solve", "solve at one parameter");
  add_common(solve);
  solve->add_option("--method", flags.methods, method_help)->expected(1);
  solve->add_option("--mu", flags.mu, "parameter values (default: the family's initial sample)");
  solve->add_option("--basis", flags.basis, "reduced basis file for ROM methods");
  solve->add_option("--out", flags.out, "write the solve report as JSON");

  auto* train = app.add_subcommand("train", "greedy reduced-basis training");
  add_common(train);
  train->add_option("--out", flags.out, "basis file to write")->required();

  auto* eval = app.add_subcommand("eval", "compare methods on the random test set");
  add_common(eval);
  eval->add_option("--method", flags.methods, method_help);
  eval->add_option("--basis", flags.basis, "reduced basis file (trained on the fly if absent)");
  eval->add_option("--out", flags.out, "report path; .csv for the table, otherwise JSON");

  auto* report = app.add_subcommand("report", "print the table of a JSON report");
  report->add_option("--in", flags.input, "JSON report from eval")->required();
  report->add_option("--out", flags.out, "write the table as CSV");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(flags.verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (assemble->parsed()) return cmd_assemble(flags);
    if (solve->parsed()) return cmd_solve(flags);
    if (train->parsed()) return cmd_train(flags);
    if (eval->parsed()) return cmd_eval(flags);
    if (report->parsed()) return cmd_report(flags);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
