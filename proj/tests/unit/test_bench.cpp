#include <doctest/doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rtrom/bench.hpp"
#include "rtrom/config.hpp"
#include "rtrom/errors.hpp"

using namespace rtrom;
using namespace rtrom::testing;

TEST_SUITE("bench") {
  TEST_CASE("full-scale presets") {
    const auto lattice = make_problem("lattice", Scale::Paper);
    CHECK(lattice.preset.nx == 80);
    CHECK(lattice.preset.ny == 80);
    CHECK(lattice.preset.n_theta == 40);
    CHECK(lattice.preset.n_z == 6);
    CHECK(lattice.tol == 1e-11);
    const auto pin = make_problem("pin_cell", Scale::Paper);
    CHECK(pin.preset.n_theta == 30);
    CHECK(pin.material.sigma_s(0.9, 0.9, {0.1, 0.1}) == 100.0);
    const auto bc = make_problem("parametric_bc", Scale::Paper);
    CHECK(bc.preset.nx == 64);
    CHECK(bc.preset.n_theta == 60);
    CHECK(bc.preset.train_grid == std::vector<int>{9, 11});
  }

  TEST_CASE("unknown problem lists the valid names") {
    try {
      make_problem("sphere");
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      for (const auto& n : problem_names()) CHECK(std::string(e.what()).find(n) != std::string::npos);
    }
  }

  TEST_CASE("materials are non-negative over each box") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& name : problem_names()) {
      const auto fam = make_problem(name);
      const auto& box = fam.box();
      for (int t = 0; t < 20; ++t) {
        Parameter mu(box.dim());
        for (std::size_t d = 0; d < box.dim(); ++d) mu[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * u(rng);
        const double x = fam.domain.x_lo + (fam.domain.x_hi - fam.domain.x_lo) * u(rng);
        const double y = fam.domain.y_lo + (fam.domain.y_hi - fam.domain.y_lo) * u(rng);
        CHECK(fam.material.sigma_s(x, y, mu) >= 0.0);
        CHECK(fam.material.sigma_a(x, y, mu) >= 0.0);
        CHECK(fam.material.sigma_t(x, y, mu) == fam.material.sigma_s(x, y, mu) + fam.material.sigma_a(x, y, mu));
      }
      CHECK(box.contains(fam.initial_sample));
    }
  }

  TEST_CASE("parameter sets") {
    const auto fam = make_problem("lattice", Scale::Paper);
    const ParameterSets sets = make_parameter_sets(fam, 42);
    REQUIRE(sets.train.size() == 121);
    CHECK(sets.train.front() == Parameter{95.0, 0.5});
    CHECK(sets.train.back() == Parameter{105.0, 1.5});
    CHECK(sets.train[1] == Parameter{95.0, 0.6});
    CHECK(sets.test.size() == 10);
    for (const auto& mu : sets.test) {
      CHECK(fam.box().contains(mu));
      CHECK_FALSE(find_parameter(sets.train, mu).has_value());
    }
    CHECK(make_parameter_sets(fam, 42).test == sets.test);
    CHECK(make_parameter_sets(fam, 43).test != sets.test);

    CHECK(uniform_grid(ParameterBox{{1.0}, {3.0}}, {1}).front() == Parameter{2.0});
    CHECK_THROWS_AS(uniform_grid(ParameterBox{{1.0}, {1.0}}, {3}), ConfigError);
    CHECK_THROWS_AS(random_parameters(ParameterBox{{2.0, 0.0}, {1.0, 1.0}}, 3, 1, {}), ConfigError);
  }

  TEST_CASE("random parameters avoid excluded points") {
    const ParameterBox box{{0.0}, {1.0}};
    const auto grid = uniform_grid(box, {101});
    const auto pts = random_parameters(box, 50, 7, grid, 1e-3);
    for (const auto& p : pts)
      for (const auto& g : grid) CHECK(std::abs(p[0] - g[0]) >= 1e-3);
  }

  TEST_CASE("thin-plate interpolation") {
    const ParameterBox box{{0.0, 10.0}, {2.0, 20.0}};
    const auto samples = uniform_grid(box, {3, 4});
    std::vector<Vector> values;
    for (const auto& s : samples) {
      Vector v(3);
      v << 1.0 + 2.0 * s[0] - 0.5 * s[1], std::sin(s[0]) * s[1], 4.0;
      values.push_back(v);
    }
    RbfInterpolator rbf(box, samples, values);
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK((rbf(samples[i]) - values[i]).cwiseAbs().maxCoeff() <= 1e-12 * 20);
    // The linear tail reproduces affine data everywhere.
    const Parameter mu{0.37, 13.3};
    CHECK(rbf(mu)(0) == doctest::Approx(1.0 + 2.0 * 0.37 - 0.5 * 13.3).epsilon(1e-10));
    CHECK(rbf(mu)(2) == doctest::Approx(4.0).epsilon(1e-12));

    RbfInterpolator single(box, {samples[5]}, {values[5]});
    CHECK(single(mu) == values[5]);
  }

  TEST_CASE("method names") {
    CHECK_NOTHROW(check_method("fgmres_romsad"));
    try {
      check_method("gmres_amg");
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      for (const auto& m : method_names()) CHECK(std::string(e.what()).find(m) != std::string::npos);
    }
  }

  TEST_CASE("self baseline and report formats") {
    auto ops = oracle_instance();
    const std::vector<Parameter> test{{99.0, 0.8}, {102.0, 1.3}};
    ComparisonOptions opts;
    const BenchmarkReport rep = run_comparison(ops, {"gmres_dsa"}, test, opts);
    CHECK(rep.row("gmres_dsa").t_rel == doctest::Approx(100.0).epsilon(1e-14));
    const auto& row = rep.row("gmres_dsa");
    double sweeps = 0.0;
    double rinf = 0.0;
    for (const auto& r : row.runs) {
      sweeps += static_cast<double>(r.sweeps);
      rinf += r.r_inf;
    }
    CHECK(row.mean_sweeps == doctest::Approx(sweeps / 2.0));
    CHECK(row.mean_r_inf == doctest::Approx(rinf / 2.0));

    const std::string csv = report_csv(rep);
    CHECK(csv.rfind("method,n_sweep,T_rel,R_inf\n", 0) == 0);

    const auto j = nlohmann::json::parse(report_json(rep));
    CHECK(j.at("problem").is_string());
    CHECK(j.dump() == nlohmann::json::parse(j.dump()).dump());
  }

  TEST_CASE("non-converged rows are starred") {
    auto ops = oracle_instance();
    ComparisonOptions opts;
    opts.method.si.max_iter = 2;
    const BenchmarkReport rep = run_comparison(ops, {"si", "gmres_dsa"}, {{100.0, 1.0}}, opts);
    const std::string csv = report_csv(rep);
    CHECK(csv.find("si*,") != std::string::npos);
    CHECK(csv.find("gmres_dsa,") != std::string::npos);
    CHECK_FALSE(rep.row("si").all_converged);
  }

  TEST_CASE("sweep counts are reproducible") {
    auto ops = lattice_instance(10, 10, 8, 2);
    const auto test = random_parameters(ops.material().box(), 3, 5, {});
    ComparisonOptions opts;
    const auto a = run_comparison(ops, {"gmres_dsa", "si_dsa"}, test, opts);
    const auto b = run_comparison(ops, {"gmres_dsa", "si_dsa"}, test, opts);
    for (const auto& m : {"gmres_dsa", "si_dsa"})
      for (std::size_t i = 0; i < test.size(); ++i) CHECK(a.row(m).runs[i].sweeps == b.row(m).runs[i].sweeps);
  }

  TEST_CASE("methods needing a basis refuse to run without one") {
    auto ops = oracle_instance();
    BoundOperators bound(ops, {100.0, 1.0});
    CHECK_THROWS_AS(run_method("fgmres_romsad", bound, {}), ConfigError);
    CHECK_THROWS_AS(run_method("gmres_dsa_interp", bound, {}), ConfigError);
  }

  TEST_CASE("interpolated initial guess") {
    auto fam = make_problem("lattice", Scale::Desk);
    auto ops = discretize(fam);
    MethodOptions opts;
    const RbfInterpolator interp = interpolator_from_samples(ops, uniform_grid(fam.box(), {3, 3}), opts);
    for (const auto& mu : random_parameters(fam.box(), 3, 11, {})) {
      BoundOperators bound(ops, mu);
      const SolveReport zero = run_method("gmres_dsa", bound, opts);
      const SolveReport guess = run_method("gmres_dsa_interp", bound, opts, {nullptr, &interp});
      CHECK(guess.converged);
      CHECK(guess.sweeps <= zero.sweeps + 1);
    }
  }

  TEST_CASE("wall time tracks sweep count") {
    auto fam = make_problem("pin_cell", Scale::Desk);
    auto ops = discretize(fam);
    std::vector<double> seconds;
    std::vector<double> sweeps;
    for (const auto& mu : random_parameters(fam.box(), 2, 3, {})) {
      BoundOperators bound(ops, mu);
      for (const char* m : {"si_dsa", "gmres_dsa", "gmres_pc_dsa"}) {
        const SolveReport r = run_method(m, bound, {});
        seconds.push_back(r.wall_seconds);
        sweeps.push_back(static_cast<double>(r.sweeps));
      }
    }
    CHECK(pearson(seconds, sweeps) >= 0.9);
  }

  TEST_CASE("config round trip and validation") {
    const RunConfig def = config_from_json("{}");
    CHECK(def.problem == "lattice");
    CHECK(def.seed == 20240601u);
    const std::string text = R"({"problem": {"name": "pin_cell", "scale": "desk"},
      "mesh": {"nx": 16, "ny": 12}, "quadrature": {"n_theta": 8, "n_z": 2},
      "dsa": {"variant": "pc", "inner": "pcg"}, "rom": {"window": 1, "eps": 1e-6, "initial_sample": [0.05, 0.5]},
      "bench": {"methods": ["si_dsa", "fgmres_romsad"], "seed": 9, "train_grid": [3, 3], "n_test": 4}})";
    const RunConfig c = config_from_json(text);
    CHECK(c.problem == "pin_cell");
    CHECK(c.nx == 16);
    CHECK(c.dsa.variant == DsaVariant::PartiallyConsistent);
    CHECK(c.dsa.inner == DsaInnerSolver::Pcg);
    CHECK(c.window == 1);
    const RunConfig back = config_from_json(config_to_json(c));
    CHECK(back.problem == c.problem);
    CHECK(back.nx == c.nx);
    CHECK(back.ny == c.ny);
    CHECK(back.n_theta == c.n_theta);
    CHECK(back.dsa.variant == c.dsa.variant);
    CHECK(back.eps_rom == c.eps_rom);
    CHECK(back.initial_sample == c.initial_sample);
    CHECK(back.methods == c.methods);
    CHECK(back.seed == c.seed);
    CHECK(back.train_grid == c.train_grid);

    const ProblemFamily fam = configured_problem(c);
    CHECK(fam.preset.nx == 16);
    CHECK(fam.preset.ny == 12);
    const ParameterSets sets = parameter_sets(c, fam);
    CHECK(sets.train.size() == 9);
    CHECK(sets.test.size() == 4);
    CHECK(greedy_options(c, fam, sets.train).initial_sample == 2);

    CHECK_THROWS_AS(config_from_json(R"({"solver": {"tolerance": 1e-8}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"extras": {}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"bench": {"methods": ["magic"]}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"mesh": {"nx": "many"}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  }
}
