#include <doctest/doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rtrom/errors.hpp"
#include "rtrom/quadrature.hpp"

using namespace rtrom;

namespace {

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

// (1/4pi) int x^a y^b z^c over the unit sphere.
double sphere_moment(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1) /
         double_factorial(a + b + c + 1);
}

double quad_moment(const AngularQuadrature& q, int a, int b, int c) {
  std::vector<double> f;
  for (const auto& d : q.nodes()) f.push_back(std::pow(d.x, a) * std::pow(d.y, b) * std::pow(d.z, c));
  return angular_integrate(q, f);
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre matches tabulated rules") {
    auto [x2, w2] = gauss_legendre(2);
    CHECK(x2[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(x2[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(w2[0] == doctest::Approx(1.0));

    auto [x3, w3] = gauss_legendre(3);
    CHECK(x3[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
    CHECK(std::abs(x3[1]) < 1e-15);
    CHECK(w3[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(w3[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  }

  TEST_CASE("two-node rule points along +-y") {
    auto q = build_cl_quadrature(2, 1);
    REQUIRE(q.size() == 2);
    CHECK(std::abs(q.node(0).x) < 1e-15);
    CHECK(q.node(0).y == doctest::Approx(1.0));
    CHECK(std::abs(q.node(0).z) < 1e-15);
    CHECK(q.node(1).y == doctest::Approx(-1.0));
    CHECK(q.weight(0) == doctest::Approx(0.5));
    CHECK(q.weight(1) == doctest::Approx(0.5));
  }

  TEST_CASE("node count is n_theta * n_z") {
    CHECK(build_cl_quadrature(40, 6).size() == 240);
    CHECK(build_cl_quadrature(16, 4).size() == 64);
  }

  TEST_CASE("type invariants") {
    for (auto [nt, nz] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {4, 2}, {7, 3}, {16, 4}, {40, 6}, {60, 6}}) {
      CAPTURE(nt);
      CAPTURE(nz);
      auto q = build_cl_quadrature(nt, nz);
      double sum = 0.0;
      for (double w : q.weights()) {
        CHECK(w > 0.0);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-14);
      for (const auto& d : q.nodes()) CHECK(std::abs(std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z) - 1.0) <= 1e-14);
    }
  }

  TEST_CASE("reflection symmetry for even n_theta") {
    for (auto [nt, nz] : std::vector<std::pair<int, int>>{{2, 1}, {4, 2}, {16, 4}, {30, 6}}) {
      auto q = build_cl_quadrature(nt, nz);
      for (int j = 0; j < q.size(); ++j) {
        const auto& d = q.node(j);
        bool found = false;
        for (int k = 0; k < q.size(); ++k) {
          const auto& e = q.node(k);
          if (std::abs(e.x + d.x) < 1e-14 && std::abs(e.y + d.y) < 1e-14 && std::abs(e.z - d.z) < 1e-14 &&
              std::abs(q.weight(k) - q.weight(j)) < 1e-15) {
            found = true;
            break;
          }
        }
        CHECK(found);
      }
    }
  }

  TEST_CASE("ordering j = j2 * n_theta + j1") {
    auto q = build_cl_quadrature(8, 3);
    auto [z, wz] = gauss_legendre(3);
    for (int j2 = 0; j2 < 3; ++j2) {
      for (int j1 = 0; j1 < 8; ++j1) {
        const auto& d = q.node(j2 * 8 + j1);
        const double theta = (2 * j1 + 1) * std::numbers::pi / 8.0;
        const double s = std::sqrt(1.0 - z[j2] * z[j2]);
        CHECK(d.z == doctest::Approx(z[j2]).epsilon(1e-14));
        CHECK(d.x == doctest::Approx(s * std::cos(theta)).epsilon(1e-14));
        CHECK(d.y == doctest::Approx(s * std::sin(theta)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("simple moments") {
    auto q = build_cl_quadrature(4, 2);
    std::vector<double> one(static_cast<std::size_t>(q.size()), 1.0);
    CHECK(angular_integrate(q, one) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(quad_moment(q, 1, 0, 0)) <= 1e-14);
    CHECK(std::abs(quad_moment(q, 2, 0, 0) - 1.0 / 3.0) <= 1e-12);
  }

  TEST_CASE("monomial exactness up to min(n_theta - 1, 2 n_z - 1)") {
    for (auto [nt, nz] : std::vector<std::pair<int, int>>{{4, 2}, {8, 4}, {16, 4}, {9, 5}, {30, 6}}) {
      auto q = build_cl_quadrature(nt, nz);
      const int deg = std::min(nt - 1, 2 * nz - 1);
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b)
          for (int c = 0; a + b + c <= deg; ++c) {
            CAPTURE(nt);
            CAPTURE(nz);
            CAPTURE(a);
            CAPTURE(b);
            CAPTURE(c);
            CHECK(std::abs(quad_moment(q, a, b, c) - sphere_moment(a, b, c)) <= 1e-12);
          }
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(build_cl_quadrature(0, 2), DomainError);
    CHECK_THROWS_AS(build_cl_quadrature(4, 0), DomainError);
    auto q = build_cl_quadrature(4, 2);
    std::vector<double> short_samples(3, 1.0);
    CHECK_THROWS_AS(angular_integrate(q, short_samples), DomainError);
  }

  TEST_CASE("deterministic construction") {
    auto a = build_cl_quadrature(30, 6);
    auto b = build_cl_quadrature(30, 6);
    for (int j = 0; j < a.size(); ++j) {
      CHECK(a.node(j).x == b.node(j).x);
      CHECK(a.node(j).y == b.node(j).y);
      CHECK(a.node(j).z == b.node(j).z);
      CHECK(a.weight(j) == b.weight(j));
    }
  }
}
