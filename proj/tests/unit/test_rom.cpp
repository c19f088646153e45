#include <doctest/doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "oracles.hpp"
#include "rtrom/bench.hpp"
#include "rtrom/errors.hpp"
#include "rtrom/rom.hpp"

using namespace rtrom;
using namespace rtrom::testing;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rtrom_unit_" + name)).string();
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DiscreteOperators small_lattice() { return lattice_instance(8, 8, 8, 2); }

GreedyOptions small_greedy() {
  GreedyOptions g;
  g.window = 2;
  g.eps_rom = 1e-9;
  g.max_greedy = 4;
  g.initial_sample = 4;
  return g;
}

// Shared training run on the small lattice.
struct Trained {
  DiscreteOperators ops = small_lattice();
  std::vector<Parameter> train = uniform_grid(ops.material().box(), {3, 3});
  GreedyResult result = greedy_train(ops, train, small_greedy());
};

const Trained& trained() {
  static const Trained t;
  return t;
}

}  // namespace

TEST_SUITE("rom") {
  TEST_CASE("first correction is the scaled solution for a zero guess") {
    auto ops = small_lattice();
    BoundOperators bound(ops, {100.0, 1.0});
    TransportOperator op(bound);
    DsaOperator dsa(bound);
    KrylovState st;
    const SolveReport rep = fgmres(op, dsa, {1e-11, 100}, Vector(), &st);
    const CorrectionHistory h = xi_recurrence(st, rep.phi, Vector(), 1);
    REQUIRE(h.xi.size() == 1);
    CHECK(rel_l2(h.xi[0], rep.phi / op.rhs_tilde().norm()) <= 1e-14);
  }

  TEST_CASE("recovered corrections solve A~ xi = v") {
    auto ops = small_lattice();
    BoundOperators bound(ops, {101.0, 0.9});
    TransportOperator op(bound);
    DsaOperator dsa(bound);
    KrylovState st;
    const SolveReport rep = fgmres(op, dsa, {1e-11, 100}, Vector(), &st);
    const CorrectionHistory h = xi_recurrence(st, rep.phi, Vector(), 3);
    REQUIRE(h.xi.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) CHECK(rel_l2(op.apply_A_tilde(h.xi[l]), st.v[l]) <= 1e-8);
    const Vector ref = dense_A_tilde(bound).partialPivLu().solve(st.v[0]);
    CHECK(rel_l2(h.xi[0], ref) <= 1e-8);
  }

  TEST_CASE("history is truncated when the run is too short") {
    auto ops = small_lattice();
    BoundOperators bound(ops, {100.0, 1.0});
    TransportOperator op(bound);
    DsaOperator dsa(bound);
    KrylovState st;
    const SolveReport rep = fgmres(op, dsa, {1e-11, 100}, Vector(), &st);
    const CorrectionHistory h = xi_recurrence(st, rep.phi, Vector(), st.iterations + 5);
    // v holds iterations + 1 vectors, so at most that many corrections exist.
    CHECK(static_cast<int>(h.xi.size()) <= st.iterations + 1);
    CHECK(static_cast<int>(h.xi.size()) < st.iterations + 5);
  }

  TEST_CASE("snapshots integrate to the ideal correction") {
    auto ops = small_lattice();
    BoundOperators bound(ops, {100.0, 1.0});
    TransportOperator op(bound);
    DsaOperator dsa(bound);
    KrylovState st;
    const SolveReport rep = fgmres(op, dsa, {1e-11, 100}, Vector(), &st);
    const CorrectionHistory h = xi_recurrence(st, rep.phi, Vector(), 2);
    const auto snaps = correction_snapshots(op, h);
    REQUIRE(snaps.size() == 2);
    const Matrix T = dense_T(bound);
    const Matrix S = dense_sigma_s(bound);
    const Eigen::PartialPivLU<Matrix> lu = dense_A_tilde(bound).partialPivLu();
    for (std::size_t l = 0; l < 2; ++l) {
      const Vector dphi = integrate_angular_flux(ops.quadrature(), snaps[l]);
      CHECK(rel_l2(dphi, T * S * h.xi[l]) <= 1e-10);
      // (I - T Sigma_s) dphi = T Sigma_s v: the scalar flux of the ideal angular correction.
      CHECK(rel_l2(dphi, lu.solve(T * S * st.v[l])) <= 1e-8);
    }

    CorrectionHistory zero = h;
    for (auto& x : zero.xi) x.setZero();
    for (const auto& s : correction_snapshots(op, zero)) CHECK(s.isZero(0.0));
  }

  TEST_CASE("snapshots vanish without scattering") {
    DiscreteOperators ops(Mesh2D(Box{}, 3, 3), 1, build_cl_quadrature(4, 1), uniform_material(0.0, 1.0, 1.0));
    BoundOperators bound(ops, {0.5});
    TransportOperator op(bound);
    CorrectionHistory h;
    h.xi = {Vector::Ones(ops.num_dofs())};
    CHECK(correction_snapshots(op, h)[0].isZero(0.0));
  }

  TEST_CASE("truncated Gram-Schmidt") {
    Matrix U = Matrix::Zero(4, 1);
    U(0, 0) = 1.0;
    CHECK_FALSE(mgs_truncated(U, Vector::Unit(4, 0) * 3.0).has_value());
    const auto v = mgs_truncated(U, Vector::Unit(4, 0) + Vector::Unit(4, 1));
    REQUIRE(v.has_value());
    CHECK((*v - Vector::Unit(4, 1)).norm() <= 1e-15);

    std::mt19937_64 rng(99);
    const int n = 40;
    Matrix B(n, 0);
    int rejected = 0;
    for (int t = 0; t < 1000; ++t) {
      Vector c = random_vector(n, rng);
      if (t % 3 == 0 && B.cols() > 0) c = B * random_vector(B.cols(), rng);
      if (auto q = mgs_truncated(B, c)) {
        B.conservativeResize(n, B.cols() + 1);
        B.col(B.cols() - 1) = *q;
      } else {
        ++rejected;
      }
    }
    CHECK(B.cols() == n);
    CHECK(rejected == 1000 - n);
    CHECK((B.transpose() * B - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("greedy training invariants") {
    const Trained& t = trained();
    const GreedyResult& g = t.result;
    const GreedyOptions opts = small_greedy();
    CHECK(g.sampled.front() == opts.initial_sample);
    CHECK(g.basis.size() >= 1);
    CHECK(g.basis.size() <= static_cast<int>(g.sampled.size()) * opts.window);
    CHECK(g.basis.orthogonality_error() <= 1e-10);
    CHECK(g.basis.samples.size() == g.sampled.size());
    for (std::size_t i = 1; i < g.max_indicator.size(); ++i)
      CHECK(g.max_indicator[i] <= 1.1 * g.max_indicator[i - 1]);
    if (g.converged) CHECK(g.max_indicator.back() < opts.eps_rom);

    // Each sampled parameter now has its first-iteration correction in the basis.
    for (std::size_t k : g.sampled) {
      BoundOperators bound(t.ops, t.train[k]);
      TransportOperator op(bound);
      const Vector eta0 = bound.apply_sigma_s(op.rhs_tilde());
      CHECK(rom_indicator(g.basis, bound, eta0) <= 1e-8 * eta0.norm());
    }
    CHECK(g.timings.steps_sum() <= g.timings.total * 1.05);
  }

  TEST_CASE("ingested snapshots are reproduced by the basis") {
    const Trained& t = trained();
    const ReducedBasis& basis = t.result.basis;
    const GreedyOptions opts = small_greedy();
    BoundOperators bound(t.ops, t.train[t.result.sampled.front()]);
    TransportOperator op(bound);
    DsaOperator dsa(bound, opts.dsa);
    KrylovState st;
    const SolveReport rep = fgmres(op, dsa, opts.fom, Vector(), &st);
    const auto snaps = correction_snapshots(op, xi_recurrence(st, rep.phi, Vector(), opts.window));
    for (const auto& s : snaps) {
      const Vector u = s / s.norm();
      const Vector proj = basis.U() * (basis.U().transpose() * u);
      CHECK((u - proj).norm() <= opts.eps_qr * (1 + basis.size()));
    }
  }

  TEST_CASE("single training parameter") {
    auto ops = small_lattice();
    GreedyOptions g = small_greedy();
    g.initial_sample = 0;
    const GreedyResult r = greedy_train(ops, {{100.0, 1.0}}, g);
    CHECK(r.sampled.size() == 1);
    CHECK(r.basis.size() >= 1);
    CHECK(r.basis.size() <= g.window);
    CHECK_THROWS_AS(greedy_train(ops, {}, g), ConfigError);
  }

  TEST_CASE("affine reduced operators match direct projection") {
    const Trained& t = trained();
    const ReducedBasis& basis = t.result.basis;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& box = t.ops.material().box();
    for (int trial = 0; trial < 3; ++trial) {
      const Parameter mu{box.lo[0] + (box.hi[0] - box.lo[0]) * u(rng), box.lo[1] + (box.hi[1] - box.lo[1]) * u(rng)};
      BoundOperators bound(t.ops, mu);
      const FullSystem sys = build_full_matrix(bound);
      const Matrix direct = basis.U().transpose() * sys.A * basis.U();
      const Matrix affine = basis.reduced_operator(bound.coefficients());
      CHECK((affine - direct).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("one unit piece reproduces the stored operators") {
    DiscreteOperators ops(Mesh2D(Box{}, 4, 4), 1, build_cl_quadrature(4, 2), uniform_material(0.8, 0.3, 1.0));
    ReducedBasis basis(ops);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3; ++i) basis.ingest(ops, random_vector(ops.num_dofs() * ops.num_directions(), rng));
    REQUIRE(basis.size() == 3);
    CHECK((basis.reduced_operator({1.0}) - (basis.affine(0) + basis.affine(1))).cwiseAbs().maxCoeff() == 0.0);
    BoundOperators bound(ops, {0.5});
    const Matrix direct = basis.U().transpose() * build_full_matrix(bound).A * basis.U();
    CHECK((basis.reduced_operator(bound.coefficients()) - direct).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("empty basis gives a zero correction") {
    auto ops = small_lattice();
    ReducedBasis basis(ops);
    BoundOperators bound(ops, {100.0, 1.0});
    CHECK(reduced_solve(basis, bound, Vector::Ones(ops.num_dofs())).size() == 0);
    RomSaPreconditioner rom(basis, bound);
    const Vector r = Vector::Ones(ops.num_dofs());
    CHECK(rom.correction(r).isZero(0.0));
    CHECK((rom.apply(1, r) - r).norm() == 0.0);
  }

  TEST_CASE("ROM-SA basics") {
    const Trained& t = trained();
    BoundOperators bound(t.ops, t.train[0]);
    RomSaPreconditioner rom(t.result.basis, bound);
    CHECK_FALSE(rom.singular());
    CHECK(rom.apply(1, Vector::Zero(t.ops.num_dofs())).isZero(0.0));
    CHECK(rom.label(1) == "rom");

    DiscreteOperators plain(Mesh2D(Box{}, 3, 3), 1, build_cl_quadrature(4, 1), uniform_material(0.0, 1.0, 1.0));
    ReducedBasis b(plain);
    std::mt19937_64 rng(8);
    b.ingest(plain, random_vector(plain.num_dofs() * plain.num_directions(), rng));
    BoundOperators pb(plain, {0.5});
    RomSaPreconditioner id(b, pb);
    const Vector r = random_vector(plain.num_dofs(), rng);
    CHECK((id.apply(1, r) - r).norm() == 0.0);
  }

  TEST_CASE("first ROM correction beats DSA at a sampled parameter") {
    const Trained& t = trained();
    BoundOperators bound(t.ops, t.train[t.result.sampled.front()]);
    TransportOperator op(bound);
    DsaOperator dsa(bound);
    RomsadPreconditioner romsad(t.result.basis, bound, dsa, 2);
    const SolveReport with_rom = fgmres(op, romsad, {1e-11, 100});
    const SolveReport with_dsa = fgmres(op, dsa, {1e-11, 100});
    CHECK(with_rom.residual_history[1] < 1e-3 * with_dsa.residual_history[1]);
  }

  TEST_CASE("ROMSAD switch") {
    const Trained& t = trained();
    BoundOperators bound(t.ops, {99.0, 1.1});
    TransportOperator op(bound);
    DsaOperator dsa(bound);

    RomsadPreconditioner none(t.result.basis, bound, dsa, 0);
    const SolveReport a = fgmres(op, none, {1e-11, 100});
    const SolveReport b = fgmres(op, dsa, {1e-11, 100});
    CHECK(a.residual_history == b.residual_history);
    CHECK(none.rom_applications() == 0);

    for (int w : {1, 2, 3}) {
      RomsadPreconditioner sw(t.result.basis, bound, dsa, w);
      CHECK_FALSE(sw.is_linear());
      const SolveReport r = fgmres(op, sw, {1e-11, 100});
      CHECK(r.converged);
      const auto roms = std::count(r.preconditioner_trace.begin(), r.preconditioner_trace.end(), "rom");
      CHECK(roms == std::min(w, r.iterations));
      CHECK(sw.rom_applications() == std::min(w, r.iterations));
      for (int j = w; j < r.iterations; ++j) CHECK(r.preconditioner_trace[static_cast<std::size_t>(j)] == dsa.label(1));
    }
  }

  TEST_CASE("basis files round-trip") {
    const Trained& t = trained();
    const std::string p1 = temp_path("a.romb");
    const std::string p2 = temp_path("b.romb");
    save_basis(t.result.basis, p1);
    const ReducedBasis loaded = load_basis(p1, t.ops);
    save_basis(loaded, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));
    CHECK((loaded.U() - t.result.basis.U()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.samples == t.result.basis.samples);
    CHECK(loaded.window == t.result.basis.window);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
  }

  TEST_CASE("corrupted basis files") {
    const Trained& t = trained();
    const std::string p = temp_path("c.romb");
    save_basis(t.result.basis, p);
    std::string bytes = read_bytes(p);

    std::string bad = bytes;
    bad[0] = 'X';
    write_bytes(p, bad);
    CHECK_THROWS_AS(load_basis(p), FormatError);

    write_bytes(p, bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS(load_basis(p), FormatError);

    write_bytes(p, bytes + "x");
    CHECK_THROWS_AS(load_basis(p), FormatError);
    std::filesystem::remove(p);
  }

  TEST_CASE("mismatched discretization is reported with both shapes") {
    const Trained& t = trained();
    const std::string p = temp_path("d.romb");
    save_basis(t.result.basis, p);
    auto other = lattice_instance(6, 6, 8, 2);
    try {
      load_basis(p, other);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("dofs=256") != std::string::npos);
      CHECK(msg.find("dofs=144") != std::string::npos);
    }
    std::filesystem::remove(p);
  }

  TEST_CASE("singular reduced matrix falls back to DSA") {
    const Trained& t = trained();
    const ReducedBasis& basis = t.result.basis;
    const std::string p = temp_path("e.romb");
    save_basis(basis, p);
    std::string bytes = read_bytes(p);
    const std::size_t r = static_cast<std::size_t>(basis.size());
    const std::size_t tail = (static_cast<std::size_t>(basis.num_pieces()) + 1) * r * r * sizeof(double);
    std::fill(bytes.end() - static_cast<std::ptrdiff_t>(tail), bytes.end(), '\0');
    write_bytes(p, bytes);
    const ReducedBasis zeroed = load_basis(p, t.ops);
    std::filesystem::remove(p);

    BoundOperators bound(t.ops, t.train[0]);
    DsaOperator dsa(bound);
    RomSaPreconditioner rom(zeroed, bound, &dsa);
    CHECK(rom.singular());
    CHECK(rom.label(1) == "dsa_fallback");
    const Vector v = Vector::Ones(t.ops.num_dofs());
    CHECK((rom.apply(1, v) - dsa.apply(1, v)).norm() == 0.0);
    RomSaPreconditioner bare(zeroed, bound, nullptr);
    CHECK_THROWS_AS(bare.apply(1, v), NumericalError);
  }

  TEST_CASE("parameter lookup") {
    const std::vector<Parameter> train{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(find_parameter(train, {3.0, 4.0}) == 1u);
    CHECK_FALSE(find_parameter(train, {3.0, 4.1}).has_value());
  }
}
