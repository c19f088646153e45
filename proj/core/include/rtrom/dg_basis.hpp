#pragma once

#include <array>
#include <functional>

#include "rtrom/linalg.hpp"
#include "rtrom/mesh.hpp"

namespace rtrom {

/// Tensor-product Legendre basis on a uniform rectangular cell, scaled so the
/// cell mass matrix is the identity. Local index k = a + (K + 1) * b where a is
/// the degree in x and b the degree in y.
///
/// Every element and face matrix is identical for all cells of a uniform mesh,
/// so they are computed once here.
class DgBasis {
 public:
  DgBasis(int order, double hx, double hy);

  int order() const { return order_; }
  int dofs_per_cell() const { return (order_ + 1) * (order_ + 1); }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  /// Value of basis function k at reference coordinates (xi, eta) in [-1, 1]^2.
  double value(int k, double xi, double eta) const;

  /// (grad_x)_{kl} = int d(eta_k)/dx eta_l over a cell; same for y.
  const Matrix& grad_x() const { return grad_x_; }
  const Matrix& grad_y() const { return grad_y_; }

  /// (E_f)_{kl} = int_f eta_k eta_l with both traces from the same cell.
  const Matrix& face_self(Face f) const { return face_self_[static_cast<int>(f)]; }
  /// (F_f)_{kl} = int_f eta_k eta_l^nbr, test function in this cell and trial
  /// function from the neighbor across f.
  const Matrix& face_neighbor(Face f) const { return face_neighbor_[static_cast<int>(f)]; }

  /// int_cell f eta_k, tensor Gauss rule with `points` nodes per direction.
  Vector project(const CellBounds& cell, const std::function<double(double, double)>& f,
                 int points) const;
  /// int_face g eta_k along one face of the cell.
  Vector project_face(const CellBounds& cell, Face f, const std::function<double(double, double)>& g,
                      int points) const;

  /// Number of Gauss points per direction used for element matrices (K + 2).
  int element_points() const { return order_ + 2; }

 private:
  int order_;
  double hx_;
  double hy_;
  Matrix grad_x_;
  Matrix grad_y_;
  std::array<Matrix, 4> face_self_;
  std::array<Matrix, 4> face_neighbor_;
};

/// Legendre polynomial P_n(x) and its derivative.
double legendre(int n, double x);
double legendre_derivative(int n, double x);

}  // namespace rtrom
