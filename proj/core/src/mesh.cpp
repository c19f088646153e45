#include "rtrom/mesh.hpp"

#include <string>

#include "rtrom/errors.hpp"

namespace rtrom {

Mesh2D::Mesh2D(Box domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw DomainError("Mesh2D: cell counts must be positive, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  }
  if (!(domain.x_hi > domain.x_lo) || !(domain.y_hi > domain.y_lo)) {
    throw DomainError("Mesh2D: degenerate domain box");
  }
  hx_ = (domain.x_hi - domain.x_lo) / nx;
  hy_ = (domain.y_hi - domain.y_lo) / ny;
}

CellBounds Mesh2D::bounds(int c) const {
  const int i = ix(c);
  const int j = iy(c);
  // Last cell snaps to the domain edge so cells tile exactly.
  const double x0 = domain_.x_lo + i * hx_;
  const double x1 = (i + 1 == nx_) ? domain_.x_hi : domain_.x_lo + (i + 1) * hx_;
  const double y0 = domain_.y_lo + j * hy_;
  const double y1 = (j + 1 == ny_) ? domain_.y_hi : domain_.y_lo + (j + 1) * hy_;
  return {x0, x1, y0, y1};
}

int Mesh2D::neighbor(int c, Face f) const {
  const int i = ix(c);
  const int j = iy(c);
  switch (f) {
    case Face::Left:
      return i > 0 ? c - 1 : -1;
    case Face::Right:
      return i + 1 < nx_ ? c + 1 : -1;
    case Face::Bottom:
      return j > 0 ? c - nx_ : -1;
    case Face::Top:
      return j + 1 < ny_ ? c + nx_ : -1;
  }
  return -1;
}

}  // namespace rtrom
