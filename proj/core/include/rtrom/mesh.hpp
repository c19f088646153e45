#pragma once

#include <array>

namespace rtrom {

struct Box {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y_lo = 0.0;
  double y_hi = 1.0;
};

enum class Face { Left = 0, Right = 1, Bottom = 2, Top = 3 };

inline constexpr std::array<Face, 4> kFaces = {Face::Left, Face::Right, Face::Bottom, Face::Top};

/// Outward unit normal of a cell face.
inline constexpr std::array<double, 2> outward_normal(Face f) {
  switch (f) {
    case Face::Left:
      return {-1.0, 0.0};
    case Face::Right:
      return {1.0, 0.0};
    case Face::Bottom:
      return {0.0, -1.0};
    case Face::Top:
      return {0.0, 1.0};
  }
  return {0.0, 0.0};
}

inline constexpr Face opposite(Face f) {
  switch (f) {
    case Face::Left:
      return Face::Right;
    case Face::Right:
      return Face::Left;
    case Face::Bottom:
      return Face::Top;
    case Face::Top:
      return Face::Bottom;
  }
  return f;
}

struct CellBounds {
  double x0, x1, y0, y1;
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }
};

/// Uniform rectangular mesh. Cell index = ix + nx * iy.
class Mesh2D {
 public:
  Mesh2D(Box domain, int nx, int ny);

  const Box& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int num_cells() const { return nx_ * ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  int cell(int ix, int iy) const { return ix + nx_ * iy; }
  int ix(int cell) const { return cell % nx_; }
  int iy(int cell) const { return cell / nx_; }
  CellBounds bounds(int cell) const;

  /// Neighbor across a face, or -1 on the domain boundary.
  int neighbor(int cell, Face f) const;

 private:
  Box domain_;
  int nx_;
  int ny_;
  double hx_;
  double hy_;
};

}  // namespace rtrom
