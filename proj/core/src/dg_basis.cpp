#include "rtrom/dg_basis.hpp"

#include <cmath>
#include <string>

#include "rtrom/errors.hpp"
#include "rtrom/quadrature.hpp"

namespace rtrom {

double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_derivative(int n, double x) {
  // P'_n = sum over k = n-1, n-3, ... of (2k + 1) P_k; valid at the endpoints too.
  double d = 0.0;
  for (int k = n - 1; k >= 0; k -= 2) d += (2.0 * k + 1.0) * legendre(k, x);
  return d;
}

DgBasis::DgBasis(int order, double hx, double hy) : order_(order), hx_(hx), hy_(hy) {
  if (order < 0) throw DomainError("DgBasis: negative order " + std::to_string(order));
  if (!(hx > 0.0) || !(hy > 0.0)) throw DomainError("DgBasis: cell sizes must be positive");

  const int n1 = order + 1;
  const int n = n1 * n1;
  auto [xq, wq] = gauss_legendre(element_points());

  // 1D matrices on the reference interval with the physical scaling folded in.
  // dx(a, c) = int l_a' l_c dx where l_a = sqrt((2a+1)/h) P_a.
  auto derivative_1d = [&](double h) {
    Matrix m = Matrix::Zero(n1, n1);
    for (int a = 0; a < n1; ++a) {
      for (int c = 0; c < n1; ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < xq.size(); ++q) {
          s += wq[q] * legendre_derivative(a, xq[q]) * legendre(c, xq[q]);
        }
        // d/dx = (2/h) d/dxi, dx = (h/2) dxi.
        m(a, c) = std::sqrt((2.0 * a + 1.0) * (2.0 * c + 1.0)) / h * s;
      }
    }
    return m;
  };
  const Matrix dx = derivative_1d(hx);
  const Matrix dy = derivative_1d(hy);

  grad_x_ = Matrix::Zero(n, n);
  grad_y_ = Matrix::Zero(n, n);
  for (int b = 0; b < n1; ++b) {
    for (int a = 0; a < n1; ++a) {
      for (int c = 0; c < n1; ++c) {
        grad_x_(a + n1 * b, c + n1 * b) = dx(a, c);
        grad_y_(b + n1 * a, b + n1 * c) = dy(a, c);
      }
    }
  }

  // Trace of the 1D factor at xi = -1 (side 0) or +1 (side 1).
  auto trace = [](int a, double h, int side) {
    const double sign = (side == 0 && a % 2 == 1) ? -1.0 : 1.0;
    return sign * std::sqrt((2.0 * a + 1.0) / h);
  };

  for (Face f : kFaces) {
    Matrix self = Matrix::Zero(n, n);
    Matrix nbr = Matrix::Zero(n, n);
    const bool vertical = (f == Face::Left || f == Face::Right);
    const int side = (f == Face::Left || f == Face::Bottom) ? 0 : 1;
    const double h = vertical ? hx : hy;
    for (int t = 0; t < n1; ++t) {      // tangential degree, shared by test and trial
      for (int a = 0; a < n1; ++a) {    // normal degree of the test function
        for (int c = 0; c < n1; ++c) {  // normal degree of the trial function
          const int k = vertical ? a + n1 * t : t + n1 * a;
          const int l = vertical ? c + n1 * t : t + n1 * c;
          self(k, l) = trace(a, h, side) * trace(c, h, side);
          nbr(k, l) = trace(a, h, side) * trace(c, h, 1 - side);
        }
      }
    }
    face_self_[static_cast<int>(f)] = self;
    face_neighbor_[static_cast<int>(f)] = nbr;
  }
}

double DgBasis::value(int k, double xi, double eta) const {
  const int n1 = order_ + 1;
  const int a = k % n1;
  const int b = k / n1;
  return std::sqrt((2.0 * a + 1.0) / hx_) * legendre(a, xi) * std::sqrt((2.0 * b + 1.0) / hy_) *
         legendre(b, eta);
}

Vector DgBasis::project(const CellBounds& cell, const std::function<double(double, double)>& f,
                        int points) const {
  auto [xq, wq] = gauss_legendre(points);
  const int n = dofs_per_cell();
  Vector out = Vector::Zero(n);
  const double jx = 0.5 * (cell.x1 - cell.x0);
  const double jy = 0.5 * (cell.y1 - cell.y0);
  for (std::size_t q = 0; q < xq.size(); ++q) {
    for (std::size_t p = 0; p < xq.size(); ++p) {
      const double x = cell.cx() + jx * xq[p];
      const double y = cell.cy() + jy * xq[q];
      const double fv = f(x, y) * wq[p] * wq[q] * jx * jy;
      if (fv == 0.0) continue;
      for (int k = 0; k < n; ++k) out(k) += fv * value(k, xq[p], xq[q]);
    }
  }
  return out;
}

Vector DgBasis::project_face(const CellBounds& cell, Face f,
                             const std::function<double(double, double)>& g, int points) const {
  auto [xq, wq] = gauss_legendre(points);
  const int n = dofs_per_cell();
  Vector out = Vector::Zero(n);
  const bool vertical = (f == Face::Left || f == Face::Right);
  const double fixed = (f == Face::Left || f == Face::Bottom) ? -1.0 : 1.0;
  const double jac = vertical ? 0.5 * (cell.y1 - cell.y0) : 0.5 * (cell.x1 - cell.x0);
  for (std::size_t p = 0; p < xq.size(); ++p) {
    const double xi = vertical ? fixed : xq[p];
    const double eta = vertical ? xq[p] : fixed;
    const double x = cell.cx() + 0.5 * (cell.x1 - cell.x0) * xi;
    const double y = cell.cy() + 0.5 * (cell.y1 - cell.y0) * eta;
    const double gv = g(x, y) * wq[p] * jac;
    if (gv == 0.0) continue;
    for (int k = 0; k < n; ++k) out(k) += gv * value(k, xi, eta);
  }
  return out;
}

}  // namespace rtrom
