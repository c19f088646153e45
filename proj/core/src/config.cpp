#include "rtrom/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"problem", {"name", "scale"}},
      {"mesh", {"nx", "ny", "order"}},
      {"quadrature", {"n_theta", "n_z"}},
      {"solver", {"tol", "max_iter", "si_max_iter", "reorthogonalize", "oracle_cap"}},
      {"dsa", {"variant", "inner", "inner_tol", "inner_max_iter"}},
      {"rom", {"window", "eps", "max_greedy", "initial_sample", "prenormalize", "eps_qr"}},
      {"bench", {"methods", "baseline", "seed", "n_test", "train_grid", "measure_all_snapshots"}},
  };
  return s;
}

template <typename T>
void read(const json& sec, const char* key, T& out, const std::string& where) {
  if (!sec.contains(key)) return;
  try {
    out = sec.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for " + where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read(const json& sec, const char* key, std::optional<T>& out, const std::string& where) {
  if (!sec.contains(key)) return;
  T v{};
  read(sec, key, v, where);
  out = v;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [section, body] : j.items()) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("config: unknown section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      (void)value;
      if (!it->second.count(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
    }
  }
  RunConfig c;
  const json empty = json::object();
  auto sec = [&](const char* name) -> const json& { return j.contains(name) ? j.at(name) : empty; };

  read(sec("problem"), "name", c.problem, "problem");
  std::string scale = to_string(c.scale);
  read(sec("problem"), "scale", scale, "problem");
  c.scale = parse_scale(scale);
  read(sec("mesh"), "nx", c.nx, "mesh");
  read(sec("mesh"), "ny", c.ny, "mesh");
  read(sec("mesh"), "order", c.order, "mesh");
  read(sec("quadrature"), "n_theta", c.n_theta, "quadrature");
  read(sec("quadrature"), "n_z", c.n_z, "quadrature");
  read(sec("solver"), "tol", c.tol, "solver");
  read(sec("solver"), "max_iter", c.max_iter, "solver");
  read(sec("solver"), "si_max_iter", c.si_max_iter, "solver");
  read(sec("solver"), "reorthogonalize", c.reorthogonalize, "solver");
  read(sec("solver"), "oracle_cap", c.oracle_cap, "solver");
  std::string variant = to_string(c.dsa.variant);
  read(sec("dsa"), "variant", variant, "dsa");
  c.dsa.variant = parse_dsa_variant(variant);
  std::string inner = "direct";
  read(sec("dsa"), "inner", inner, "dsa");
  c.dsa.inner = parse_inner_solver(inner);
  read(sec("dsa"), "inner_tol", c.dsa.inner_tol, "dsa");
  read(sec("dsa"), "inner_max_iter", c.dsa.inner_max_iter, "dsa");
  read(sec("rom"), "window", c.window, "rom");
  read(sec("rom"), "eps", c.eps_rom, "rom");
  read(sec("rom"), "max_greedy", c.max_greedy, "rom");
  read(sec("rom"), "initial_sample", c.initial_sample, "rom");
  read(sec("rom"), "prenormalize", c.prenormalize, "rom");
  read(sec("rom"), "eps_qr", c.eps_qr, "rom");
  read(sec("bench"), "methods", c.methods, "bench");
  read(sec("bench"), "baseline", c.baseline, "bench");
  read(sec("bench"), "seed", c.seed, "bench");
  read(sec("bench"), "n_test", c.n_test, "bench");
  read(sec("bench"), "train_grid", c.train_grid, "bench");
  read(sec("bench"), "measure_all_snapshots", c.measure_all_snapshots, "bench");
  for (const auto& m : c.methods) check_method(m);
  check_method(c.baseline);
  if (!(c.tol > 0.0)) throw ConfigError("config: solver.tol must be positive");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["problem"] = {{"name", c.problem}, {"scale", to_string(c.scale)}};
  json mesh = json::object();
  if (c.nx) mesh["nx"] = *c.nx;
  if (c.ny) mesh["ny"] = *c.ny;
  if (c.order) mesh["order"] = *c.order;
  j["mesh"] = mesh;
  json quad = json::object();
  if (c.n_theta) quad["n_theta"] = *c.n_theta;
  if (c.n_z) quad["n_z"] = *c.n_z;
  j["quadrature"] = quad;
  j["solver"] = {{"tol", c.tol},
                 {"max_iter", c.max_iter},
                 {"si_max_iter", c.si_max_iter},
                 {"reorthogonalize", c.reorthogonalize},
                 {"oracle_cap", c.oracle_cap}};
  j["dsa"] = {{"variant", to_string(c.dsa.variant)},
              {"inner", c.dsa.inner == DsaInnerSolver::Direct ? "direct" : "pcg"},
              {"inner_tol", c.dsa.inner_tol},
              {"inner_max_iter", c.dsa.inner_max_iter}};
  json rom = {{"max_greedy", c.max_greedy}, {"prenormalize", c.prenormalize}, {"eps_qr", c.eps_qr}};
  if (c.window) rom["window"] = *c.window;
  if (c.eps_rom) rom["eps"] = *c.eps_rom;
  if (c.initial_sample) rom["initial_sample"] = *c.initial_sample;
  j["rom"] = rom;
  json bench = {{"methods", c.methods},
                {"baseline", c.baseline},
                {"seed", c.seed},
                {"measure_all_snapshots", c.measure_all_snapshots}};
  if (c.n_test) bench["n_test"] = *c.n_test;
  if (c.train_grid) bench["train_grid"] = *c.train_grid;
  j["bench"] = bench;
  return j.dump(2);
}

ProblemFamily configured_problem(const RunConfig& cfg) {
  ProblemFamily f = make_problem(cfg.problem, cfg.scale);
  Preset& p = f.preset;
  if (cfg.nx) p.nx = *cfg.nx;
  if (cfg.ny) p.ny = *cfg.ny;
  if (cfg.order) p.order = *cfg.order;
  if (cfg.n_theta) p.n_theta = *cfg.n_theta;
  if (cfg.n_z) p.n_z = *cfg.n_z;
  if (cfg.n_test) p.n_test = *cfg.n_test;
  if (cfg.train_grid) p.train_grid = *cfg.train_grid;
  if (cfg.window) f.window = *cfg.window;
  if (cfg.eps_rom) f.eps_rom = *cfg.eps_rom;
  if (cfg.initial_sample) f.initial_sample = *cfg.initial_sample;
  f.tol = cfg.tol;
  return f;
}

MethodOptions method_options(const RunConfig& cfg, const ProblemFamily& family) {
  MethodOptions m;
  m.krylov.tol = cfg.tol;
  m.krylov.max_iter = cfg.max_iter;
  m.krylov.reorthogonalize = cfg.reorthogonalize;
  m.si.tol = cfg.tol;
  m.si.max_iter = cfg.si_max_iter;
  m.dsa = cfg.dsa;
  m.window = family.window;
  return m;
}

GreedyOptions greedy_options(const RunConfig& cfg, const ProblemFamily& family, const std::vector<Parameter>& train) {
  GreedyOptions g;
  g.window = family.window;
  g.eps_rom = family.eps_rom;
  g.max_greedy = cfg.max_greedy;
  const auto idx = find_parameter(train, family.initial_sample);
  if (!idx) throw ConfigError("initial greedy sample is not in the training set");
  g.initial_sample = *idx;
  g.prenormalize = cfg.prenormalize;
  g.eps_qr = cfg.eps_qr;
  g.fom.tol = cfg.tol;
  g.fom.max_iter = cfg.max_iter;
  g.fom.reorthogonalize = cfg.reorthogonalize;
  g.dsa = cfg.dsa;
  g.measure_all_snapshots = cfg.measure_all_snapshots;
  return g;
}

ParameterSets parameter_sets(const RunConfig& cfg, const ProblemFamily& family) {
  return make_parameter_sets(family, cfg.seed);
}

}  // namespace rtrom
