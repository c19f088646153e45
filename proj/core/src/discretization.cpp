#include "rtrom/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <spdlog/spdlog.h>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

constexpr double kTangentTol = 1e-14;

double normal_component(const Direction& d, Face f) {
  const auto n = outward_normal(f);
  return d.x * n[0] + d.y * n[1];
}

class Fnv1a {
 public:
  void add(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  template <typename T>
  void add_value(T v) {
    add(&v, sizeof(v));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

}  // namespace

DiscreteOperators::DiscreteOperators(Mesh2D mesh, int order, AngularQuadrature quad,
                                     MaterialField material)
    : mesh_(std::move(mesh)),
      basis_(std::max(order, 0), mesh_.hx(), mesh_.hy()),
      quad_(std::move(quad)),
      material_(std::move(material)) {
  if (order < 1) {
    throw ConfigError("DG order must be at least 1 for the asymptotic-preserving scheme, got " +
                      std::to_string(order));
  }
  const int nc = num_cells();
  for (const auto& piece : material_.pieces()) {
    Vector s = Vector::Zero(nc);
    Vector a = Vector::Zero(nc);
    for (int c = 0; c < nc; ++c) {
      const CellBounds b = mesh_.bounds(c);
      if (piece.sigma_s) s(c) = piece.sigma_s(b.cx(), b.cy());
      if (piece.sigma_a) a(c) = piece.sigma_a(b.cx(), b.cy());
    }
    piece_sigma_s_.push_back(std::move(s));
    piece_sigma_a_.push_back(std::move(a));
  }
  assemble_axis_operators();
  assemble_direction_blocks();
  assemble_sources();
  compute_hash();
}

void DiscreteOperators::assemble_axis_operators() {
  const int nk = dofs_per_cell();
  const int nc = num_cells();
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<Triplet> ct;
    std::vector<Triplet> pt;
    const Matrix& grad = axis == 0 ? basis_.grad_x() : basis_.grad_y();
    const std::array<Face, 2> faces = axis == 0 ? std::array<Face, 2>{Face::Left, Face::Right}
                                                : std::array<Face, 2>{Face::Bottom, Face::Top};
    for (int c = 0; c < nc; ++c) {
      Matrix cdiag = -grad;
      Matrix pdiag = Matrix::Zero(nk, nk);
      for (Face f : faces) {
        const double n = outward_normal(f)[static_cast<std::size_t>(axis)];
        cdiag += 0.5 * n * basis_.face_self(f);
        pdiag += 0.5 * basis_.face_self(f);
        const int nb = mesh_.neighbor(c, f);
        if (nb < 0) continue;
        const Matrix& fn = basis_.face_neighbor(f);
        for (int k = 0; k < nk; ++k) {
          for (int l = 0; l < nk; ++l) {
            if (fn(k, l) == 0.0) continue;
            ct.emplace_back(c * nk + k, nb * nk + l, 0.5 * n * fn(k, l));
            pt.emplace_back(c * nk + k, nb * nk + l, -0.5 * fn(k, l));
          }
        }
      }
      for (int k = 0; k < nk; ++k) {
        for (int l = 0; l < nk; ++l) {
          if (cdiag(k, l) != 0.0) ct.emplace_back(c * nk + k, c * nk + l, cdiag(k, l));
          if (pdiag(k, l) != 0.0) pt.emplace_back(c * nk + k, c * nk + l, pdiag(k, l));
        }
      }
    }
    central_[static_cast<std::size_t>(axis)].resize(num_dofs(), num_dofs());
    central_[static_cast<std::size_t>(axis)].setFromTriplets(ct.begin(), ct.end());
    jump_[static_cast<std::size_t>(axis)].resize(num_dofs(), num_dofs());
    jump_[static_cast<std::size_t>(axis)].setFromTriplets(pt.begin(), pt.end());
  }
}

void DiscreteOperators::assemble_direction_blocks() {
  const int nd = num_directions();
  local_blocks_.resize(static_cast<std::size_t>(nd));
  inflow_.resize(static_cast<std::size_t>(nd));
  for (int j = 0; j < nd; ++j) {
    const Direction& d = quad_.node(j);
    Matrix block = -d.x * basis_.grad_x() - d.y * basis_.grad_y();
    std::vector<InflowCoupling> inflow;
    for (Face f : kFaces) {
      const double on = normal_component(d, f);
      if (on > kTangentTol) {
        block += on * basis_.face_self(f);
      } else if (on < -kTangentTol) {
        inflow.push_back({f, on * basis_.face_neighbor(f)});
      }
    }
    local_blocks_[static_cast<std::size_t>(j)] = std::move(block);
    inflow_[static_cast<std::size_t>(j)] = std::move(inflow);
  }
}

void DiscreteOperators::assemble_sources() {
  const int nk = dofs_per_cell();
  const int nc = num_cells();
  const int points = basis_.element_points();
  for (const auto& src : material_.sources()) {
    Vector g = Vector::Zero(num_dofs());
    if (src.volume) {
      for (int c = 0; c < nc; ++c) {
        g.segment(c * nk, nk) = basis_.project(mesh_.bounds(c), src.volume, points);
      }
    }
    source_volume_.push_back(std::move(g));

    std::vector<Vector> per_direction;
    if (src.inflow) {
      per_direction.resize(static_cast<std::size_t>(num_directions()));
      for (int j = 0; j < num_directions(); ++j) {
        const Direction& d = quad_.node(j);
        Vector v = Vector::Zero(num_dofs());
        for (int c = 0; c < nc; ++c) {
          for (Face f : kFaces) {
            if (mesh_.neighbor(c, f) >= 0) continue;
            const double on = normal_component(d, f);
            if (on >= -kTangentTol) continue;
            auto field = [&](double x, double y) { return src.inflow(x, y, d); };
            v.segment(c * nk, nk) -= on * basis_.project_face(mesh_.bounds(c), f, field, points);
          }
        }
        per_direction[static_cast<std::size_t>(j)] = std::move(v);
      }
    }
    source_inflow_.push_back(std::move(per_direction));
  }
}

void DiscreteOperators::compute_hash() {
  Fnv1a h;
  h.add_value(mesh_.nx());
  h.add_value(mesh_.ny());
  h.add_value(mesh_.domain().x_lo);
  h.add_value(mesh_.domain().x_hi);
  h.add_value(mesh_.domain().y_lo);
  h.add_value(mesh_.domain().y_hi);
  h.add_value(basis_.order());
  h.add_value(quad_.n_theta());
  h.add_value(quad_.n_z());
  h.add_value(num_pieces());
  for (int p = 0; p < num_pieces(); ++p) {
    h.add(piece_sigma_s(p).data(), sizeof(double) * static_cast<std::size_t>(num_cells()));
    h.add(piece_sigma_a(p).data(), sizeof(double) * static_cast<std::size_t>(num_cells()));
  }
  hash_ = h.value();
}

const Vector& DiscreteOperators::source_inflow(int q, int j) const {
  const auto& v = source_inflow_[static_cast<std::size_t>(q)];
  if (v.empty()) throw DomainError("source piece " + std::to_string(q) + " has no inflow data");
  return v[static_cast<std::size_t>(j)];
}

void DiscreteOperators::apply_advection(int j, const Vector& x, Vector& y) const {
  const int nk = dofs_per_cell();
  const int nc = num_cells();
  const Matrix& block = local_block(j);
  const auto& inflow = inflow_couplings(j);
  y.resize(num_dofs());
  for (int c = 0; c < nc; ++c) {
    auto yc = y.segment(c * nk, nk);
    yc.noalias() = block * x.segment(c * nk, nk);
    for (const auto& in : inflow) {
      const int nb = mesh_.neighbor(c, in.face);
      if (nb >= 0) yc.noalias() += in.block * x.segment(nb * nk, nk);
    }
  }
}

void DiscreteOperators::apply_advection_transpose(int j, const Vector& x, Vector& y) const {
  const int nk = dofs_per_cell();
  const int nc = num_cells();
  const Matrix& block = local_block(j);
  const auto& inflow = inflow_couplings(j);
  y.resize(num_dofs());
  for (int c = 0; c < nc; ++c) y.segment(c * nk, nk).noalias() = block.transpose() * x.segment(c * nk, nk);
  for (int c = 0; c < nc; ++c) {
    for (const auto& in : inflow) {
      const int nb = mesh_.neighbor(c, in.face);
      if (nb >= 0) y.segment(nb * nk, nk).noalias() += in.block.transpose() * x.segment(c * nk, nk);
    }
  }
}

SparseMatrix DiscreteOperators::advection_matrix(int j) const {
  const int nk = dofs_per_cell();
  std::vector<Triplet> t;
  const Matrix& block = local_block(j);
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k < nk; ++k) {
      for (int l = 0; l < nk; ++l) {
        if (block(k, l) != 0.0) t.emplace_back(c * nk + k, c * nk + l, block(k, l));
      }
    }
    for (const auto& in : inflow_couplings(j)) {
      const int nb = mesh_.neighbor(c, in.face);
      if (nb < 0) continue;
      for (int k = 0; k < nk; ++k) {
        for (int l = 0; l < nk; ++l) {
          if (in.block(k, l) != 0.0) t.emplace_back(c * nk + k, nb * nk + l, in.block(k, l));
        }
      }
    }
  }
  SparseMatrix m(num_dofs(), num_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

BoundOperators::BoundOperators(const DiscreteOperators& ops, Parameter mu)
    : ops_(&ops), mu_(std::move(mu)) {
  const auto& material = ops.material();
  for (const auto& piece : material.pieces()) coefficients_.push_back(piece.coefficient(mu_));
  for (const auto& src : material.sources()) source_coefficients_.push_back(src.coefficient(mu_));

  const int nc = ops.num_cells();
  sigma_s_ = Vector::Zero(nc);
  sigma_a_ = Vector::Zero(nc);
  for (int p = 0; p < ops.num_pieces(); ++p) {
    sigma_s_ += coefficients_[static_cast<std::size_t>(p)] * ops.piece_sigma_s(p);
    sigma_a_ += coefficients_[static_cast<std::size_t>(p)] * ops.piece_sigma_a(p);
  }
  for (int c = 0; c < nc; ++c) {
    if (sigma_s_(c) < 0.0 || sigma_a_(c) < 0.0) {
      throw DomainError("negative cross section in cell " + std::to_string(c));
    }
  }
  sigma_t_ = sigma_s_ + sigma_a_;

  source_ = Vector::Zero(ops.num_dofs());
  for (int q = 0; q < ops.num_source_pieces(); ++q) {
    source_ += source_coefficients_[static_cast<std::size_t>(q)] * ops.source_volume(q);
  }
}

Vector cell_to_dof(const Vector& cell_values, int dofs_per_cell) {
  Vector out(cell_values.size() * dofs_per_cell);
  for (Eigen::Index c = 0; c < cell_values.size(); ++c) {
    out.segment(c * dofs_per_cell, dofs_per_cell).setConstant(cell_values(c));
  }
  return out;
}

Vector BoundOperators::apply_sigma_s(const Vector& x) const {
  const int nk = ops_->dofs_per_cell();
  Vector y(x.size());
  for (int c = 0; c < ops_->num_cells(); ++c) y.segment(c * nk, nk) = sigma_s_(c) * x.segment(c * nk, nk);
  return y;
}

Vector BoundOperators::apply_sigma_t(const Vector& x) const {
  const int nk = ops_->dofs_per_cell();
  Vector y(x.size());
  for (int c = 0; c < ops_->num_cells(); ++c) y.segment(c * nk, nk) = sigma_t_(c) * x.segment(c * nk, nk);
  return y;
}

Vector BoundOperators::boundary(int j) const {
  Vector g = Vector::Zero(ops_->num_dofs());
  for (int q = 0; q < ops_->num_source_pieces(); ++q) {
    if (ops_->source_has_inflow(q)) g += source_coefficients_[static_cast<std::size_t>(q)] * ops_->source_inflow(q, j);
  }
  return g;
}

Vector BoundOperators::source_tilde(int j) const { return source_ + boundary(j); }

BoundOperators evaluate_affine(const DiscreteOperators& ops, const Parameter& mu) {
  const auto& box = ops.material().box();
  if (mu.size() != box.dim()) {
    throw DomainError("parameter has dimension " + std::to_string(mu.size()) + ", expected " +
                      std::to_string(box.dim()));
  }
  if (!box.contains(mu)) spdlog::warn("parameter outside the declared box; extrapolating");
  return BoundOperators(ops, mu);
}

FullSystem build_full_matrix(const BoundOperators& bound, std::size_t cap) {
  const auto& ops = bound.ops();
  const int nd = ops.num_directions();
  const int n = ops.num_dofs();
  const std::size_t total = static_cast<std::size_t>(nd) * static_cast<std::size_t>(n);
  if (total > cap) {
    throw DomainError("full system has " + std::to_string(total) + " unknowns, over the oracle cap " +
                      std::to_string(cap));
  }
  FullSystem sys{Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total)),
                 Vector::Zero(static_cast<Eigen::Index>(total))};
  const Vector st = cell_to_dof(bound.sigma_t(), ops.dofs_per_cell());
  const Vector ss = cell_to_dof(bound.sigma_s(), ops.dofs_per_cell());
  for (int j = 0; j < nd; ++j) {
    auto diag = sys.A.block(j * n, j * n, n, n);
    diag = Matrix(ops.advection_matrix(j));
    diag.diagonal() += st;
    for (int jp = 0; jp < nd; ++jp) {
      sys.A.block(j * n, jp * n, n, n).diagonal() -= ops.quadrature().weight(jp) * ss;
    }
    sys.b.segment(j * n, n) = bound.source_tilde(j);
  }
  return sys;
}

}  // namespace rtrom
