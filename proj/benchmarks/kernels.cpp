#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <memory>
#include <string>

#include "rtrom/bench.hpp"
#include "rtrom/dsa.hpp"
#include "rtrom/rom.hpp"
#include "rtrom/transport.hpp"

using namespace rtrom;

namespace {

const char* kProblems[] = {"lattice", "pin_cell", "variable_scattering"};

// Desk-scale operators, built once per problem.
struct Setup {
  ProblemFamily fam;
  DiscreteOperators ops;
  BoundOperators bound;
  TransportOperator op;
  Vector phi;

  explicit Setup(const std::string& name)
      : fam(make_problem(name, Scale::Desk)), ops(discretize(fam)), bound(ops, fam.initial_sample), op(bound) {
    phi = Vector::Random(ops.num_dofs());
  }
};

Setup& setup(int index) {
  static std::unique_ptr<Setup> cache[3];
  if (!cache[index]) cache[index] = std::make_unique<Setup>(kProblems[index]);
  return *cache[index];
}

void BM_TransportSweep(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  state.SetLabel(kProblems[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(s.op.apply_T(s.phi));
  state.counters["dofs"] = s.ops.num_dofs();
  state.counters["directions"] = s.ops.num_directions();
}
BENCHMARK(BM_TransportSweep)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_DsaApply(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  DsaOptions opts;
  opts.variant = state.range(1) ? DsaVariant::PartiallyConsistent : DsaVariant::FullyConsistent;
  DsaOperator dsa(s.bound, opts);
  state.SetLabel(std::string(kProblems[state.range(0)]) + (state.range(1) ? "/pc" : "/fc"));
  for (auto _ : state) benchmark::DoNotOptimize(dsa.apply(1, s.phi));
}
BENCHMARK(BM_DsaApply)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_DsaSetup(benchmark::State& state) {
  Setup& s = setup(static_cast<int>(state.range(0)));
  state.SetLabel(kProblems[state.range(0)]);
  for (auto _ : state) {
    DsaOperator dsa(s.bound);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DsaSetup)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

void BM_RomApply(benchmark::State& state) {
  Setup& s = setup(0);
  static const GreedyResult trained = [&s] {
    GreedyOptions g;
    g.window = 2;
    g.eps_rom = 1e-8;
    g.max_greedy = 4;
    return greedy_train(s.ops, uniform_grid(s.fam.box(), {3, 3}), g);
  }();
  RomSaPreconditioner rom(trained.basis, s.bound);
  state.counters["r"] = trained.basis.size();
  for (auto _ : state) benchmark::DoNotOptimize(rom.apply(1, s.phi));
}
BENCHMARK(BM_RomApply)->Unit(benchmark::kMillisecond);

void BM_RomSetup(benchmark::State& state) {
  Setup& s = setup(0);
  static const GreedyResult trained = greedy_train(s.ops, uniform_grid(s.fam.box(), {2, 2}), GreedyOptions{});
  for (auto _ : state) {
    RomSaPreconditioner rom(trained.basis, s.bound);
    benchmark::DoNotOptimize(rom.reduced_matrix().data());
  }
}
BENCHMARK(BM_RomSetup)->Unit(benchmark::kMicrosecond);

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
