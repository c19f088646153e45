#include "rtrom/rom.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "rtrom/errors.hpp"

namespace rtrom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kBreakdown = 1e-14;
constexpr double kSingularRcond = 1e-14;

// Per-DOF diagonals of one cross-section piece.
Vector piece_total(const DiscreteOperators& ops, int p) {
  return cell_to_dof(ops.piece_sigma_s(p) + ops.piece_sigma_a(p), ops.dofs_per_cell());
}

Vector piece_scattering(const DiscreteOperators& ops, int p) {
  return cell_to_dof(ops.piece_sigma_s(p), ops.dofs_per_cell());
}

std::string shape_string(int nd, int ndof, int np, std::uint64_t hash) {
  std::ostringstream os;
  os << "(directions=" << nd << ", dofs=" << ndof << ", pieces=" << np << ", hash=" << hash << ")";
  return os.str();
}

}  // namespace

CorrectionHistory xi_recurrence(const KrylovState& state, const Vector& phi, const Vector& phi0, int window) {
  if (window < 1) throw DomainError("xi_recurrence: window must be at least 1");
  CorrectionHistory hist;
  hist.phi = phi;
  hist.phi0 = phi0.size() == 0 ? Vector::Zero(phi.size()) : phi0;
  if (state.beta == 0.0) {
    spdlog::warn("xi_recurrence: zero initial residual, no corrections recovered");
    return hist;
  }
  hist.xi.push_back((phi - hist.phi0) / state.beta);
  for (int l = 2; l <= window; ++l) {
    const int col = l - 2;  // zero-based column of H and index of z^(l-1)
    if (col >= state.iterations || static_cast<std::size_t>(col) >= state.z.size()) {
      spdlog::warn("xi_recurrence: FGMRES stopped after {} iterations; history truncated at {}", state.iterations,
                   l - 1);
      break;
    }
    const double h = state.H(l - 1, col);
    if (std::abs(h) < kBreakdown) {
      spdlog::warn("xi_recurrence: H({},{}) = {:.3e} below breakdown threshold; history truncated at {}", l, l - 1, h,
                   l - 1);
      break;
    }
    Vector x = state.z[static_cast<std::size_t>(col)];
    for (int i = 1; i < l; ++i) x -= state.H(i - 1, col) * hist.xi[static_cast<std::size_t>(i - 1)];
    hist.xi.push_back(x / h);
  }
  return hist;
}

std::vector<Vector> correction_snapshots(const TransportOperator& op, const CorrectionHistory& hist) {
  std::vector<Vector> snaps;
  snaps.reserve(hist.xi.size());
  for (const Vector& xi : hist.xi) snaps.push_back(op.sweep_all(op.bound().apply_sigma_s(xi)));
  return snaps;
}

std::optional<Vector> mgs_truncated(const Eigen::Ref<const Matrix>& U, Vector candidate, double eps_qr) {
  for (Eigen::Index i = 0; i < U.cols(); ++i) candidate -= U.col(i).dot(candidate) * U.col(i);
  const double norm = candidate.norm();
  if (!(norm > eps_qr)) return std::nullopt;
  candidate /= norm;
  for (Eigen::Index i = 0; i < U.cols(); ++i) candidate -= U.col(i).dot(candidate) * U.col(i);
  candidate.normalize();
  return candidate;
}

ReducedBasis::ReducedBasis(int num_directions, int num_dofs, int num_pieces, std::uint64_t discretization_hash)
    : num_directions_(num_directions),
      num_dofs_(num_dofs),
      num_pieces_(num_pieces),
      hash_(discretization_hash),
      affine_(static_cast<std::size_t>(num_pieces + 1)) {
  if (num_directions < 1 || num_dofs < 1 || num_pieces < 0) throw DomainError("ReducedBasis: invalid shape");
  U_.resize(static_cast<Eigen::Index>(num_directions) * num_dofs, 0);
  S1_.resize(num_dofs, 0);
  Sw_.resize(num_dofs, 0);
}

ReducedBasis::ReducedBasis(const DiscreteOperators& ops)
    : ReducedBasis(ops.num_directions(), ops.num_dofs(), ops.num_pieces(), ops.hash()) {}

Eigen::Ref<const Matrix> ReducedBasis::block(int j) const {
  return U_.block(static_cast<Eigen::Index>(j) * num_dofs_, 0, num_dofs_, r_);
}

void ReducedBasis::reserve_columns(int cols) {
  if (cols <= U_.cols()) return;
  const Eigen::Index cap = std::max<Eigen::Index>(cols, 2 * U_.cols());
  U_.conservativeResize(Eigen::NoChange, cap);
  S1_.conservativeResize(Eigen::NoChange, cap);
  Sw_.conservativeResize(Eigen::NoChange, cap);
}

Matrix ReducedBasis::reduced_operator(const std::vector<double>& piece_coefficients) const {
  if (static_cast<int>(piece_coefficients.size()) != num_pieces_)
    throw DomainError("reduced_operator: expected " + std::to_string(num_pieces_) + " coefficients, got " +
                      std::to_string(piece_coefficients.size()));
  Matrix A = affine_[0];
  for (int p = 0; p < num_pieces_; ++p) A += piece_coefficients[static_cast<std::size_t>(p)] * affine_[static_cast<std::size_t>(p + 1)];
  return A;
}

bool ReducedBasis::ingest(const DiscreteOperators& ops, const Vector& candidate) {
  validate(ops);
  if (candidate.size() != U_.rows()) throw DomainError("ReducedBasis::ingest: candidate has the wrong length");
  Vector c = candidate;
  if (prenormalize) {
    const double n = c.norm();
    if (n == 0.0) return false;
    c /= n;
  }
  auto u = mgs_truncated(U(), std::move(c), eps_qr);
  if (!u) return false;

  const int nd = num_directions_;
  const Eigen::Index n = num_dofs_;
  const int r = r_;
  reserve_columns(r + 1);
  U_.col(r) = *u;
  Vector s1 = Vector::Zero(n);
  Vector sw = Vector::Zero(n);
  for (int j = 0; j < nd; ++j) {
    s1 += u->segment(j * n, n);
    sw += ops.quadrature().weight(j) * u->segment(j * n, n);
  }
  S1_.col(r) = s1;
  Sw_.col(r) = sw;
  r_ = r + 1;

  const auto Unew = U();
  for (auto& A : affine_) A.conservativeResize(r_, r_);

  // Projections accumulate per direction: one long dot product over all directions loses
  // about two digits, which the large cross-section coefficients then amplify.
  const auto block_of = [n](const auto& M, int j) { return M.middleRows(static_cast<Eigen::Index>(j) * n, n); };
  Vector adv_col = Vector::Zero(r_);
  Vector adv_row = Vector::Zero(r_);
  Vector tmp(n);
  for (int j = 0; j < nd; ++j) {
    const auto uj = u->segment(static_cast<Eigen::Index>(j) * n, n);
    ops.apply_advection(j, uj, tmp);
    adv_col.noalias() += block_of(Unew, j).transpose() * tmp;
    ops.apply_advection_transpose(j, uj, tmp);
    adv_row.noalias() += block_of(Unew, j).transpose() * tmp;
  }
  affine_[0].col(r) = adv_col;
  affine_[0].row(r).head(r) = adv_row.head(r).transpose();

  const auto S1n = S1();
  const auto Swn = Sw();
  for (int p = 0; p < num_pieces_; ++p) {
    const Vector dt = piece_total(ops, p);
    const Vector ds = piece_scattering(ops, p);
    Vector col_t = Vector::Zero(r_);
    for (int j = 0; j < nd; ++j)
      col_t.noalias() += block_of(Unew, j).transpose() * dt.cwiseProduct(u->segment(static_cast<Eigen::Index>(j) * n, n));
    const Vector col_s = S1n.transpose() * ds.cwiseProduct(sw);
    const Vector row_s = Swn.transpose() * ds.cwiseProduct(s1);
    Matrix& A = affine_[static_cast<std::size_t>(p + 1)];
    A.col(r) = col_t - col_s;
    A.row(r).head(r) = (col_t.head(r) - row_s.head(r)).transpose();
  }
  return true;
}

double ReducedBasis::orthogonality_error() const {
  if (r_ == 0) return 0.0;
  const Matrix G = U().transpose() * U();
  return (G - Matrix::Identity(r_, r_)).cwiseAbs().maxCoeff();
}

void ReducedBasis::validate(const DiscreteOperators& ops) const {
  if (ops.num_directions() != num_directions_ || ops.num_dofs() != num_dofs_ || ops.num_pieces() != num_pieces_ ||
      ops.hash() != hash_) {
    throw ValidationError("reduced basis shape " + shape_string(num_directions_, num_dofs_, num_pieces_, hash_) +
                          " does not match discretization " +
                          shape_string(ops.num_directions(), ops.num_dofs(), ops.num_pieces(), ops.hash()));
  }
}

Vector reduced_solve(const ReducedBasis& basis, const BoundOperators& bound, const Vector& rhs) {
  if (basis.size() == 0) return Vector();
  const Matrix A = basis.reduced_operator(bound.coefficients());
  return A.partialPivLu().solve(basis.S1().transpose() * rhs);
}

double rom_indicator(const ReducedBasis& basis, const BoundOperators& bound, const Vector& eta0) {
  const DiscreteOperators& ops = bound.ops();
  const Eigen::Index n = ops.num_dofs();
  Vector common = eta0;
  Vector c;
  if (basis.size() > 0) {
    c = reduced_solve(basis, bound, eta0);
    common += bound.apply_sigma_s(basis.Sw() * c);
  }
  const Vector sigma_t = cell_to_dof(bound.sigma_t(), ops.dofs_per_cell());
  double worst = 0.0;
  Vector x(n);
  Vector y(n);
  for (int j = 0; j < ops.num_directions(); ++j) {
    if (basis.size() > 0) {
      x = basis.block(j) * c;
      ops.apply_advection(j, x, y);
      y += sigma_t.cwiseProduct(x);
      y -= common;
    } else {
      y = -common;
    }
    worst = std::max(worst, y.norm());
  }
  return worst;
}

RomSaPreconditioner::RomSaPreconditioner(const ReducedBasis& basis, const BoundOperators& bound, DsaOperator* fallback)
    : basis_(&basis), bound_(&bound), fallback_(fallback) {
  basis.validate(bound.ops());
  if (basis.size() == 0) return;
  reduced_ = basis.reduced_operator(bound.coefficients());
  lu_.compute(reduced_);
  const double rc = lu_.rcond();
  if (!(rc >= kSingularRcond)) {
    singular_ = true;
    spdlog::warn("ROM-SA: reduced matrix is numerically singular (rcond {:.3e}); using DSA instead", rc);
  }
}

Vector RomSaPreconditioner::correction(const Vector& r) const {
  if (basis_->size() == 0) return Vector::Zero(r.size());
  const Vector c = lu_.solve(basis_->S1().transpose() * bound_->apply_sigma_s(r));
  return basis_->Sw() * c;
}

Vector RomSaPreconditioner::apply(int iteration, const Vector& r) {
  if (singular_) {
    if (fallback_ == nullptr) throw NumericalError("ROM-SA: singular reduced matrix and no DSA fallback");
    return fallback_->apply(iteration, r);
  }
  return r + correction(r);
}

RomsadPreconditioner::RomsadPreconditioner(const ReducedBasis& basis, const BoundOperators& bound, DsaOperator& dsa,
                                           int window)
    : rom_(basis, bound, &dsa), dsa_(&dsa), window_(window) {
  if (window < 0) throw DomainError("ROMSAD: window must be non-negative");
}

Vector RomsadPreconditioner::apply(int iteration, const Vector& r) {
  if (iteration <= window_) {
    ++rom_applications_;
    return rom_.apply(iteration, r);
  }
  return dsa_->apply(iteration, r);
}

std::string RomsadPreconditioner::label(int iteration) const {
  return iteration <= window_ ? rom_.label(iteration) : dsa_->label(iteration);
}

std::optional<std::size_t> find_parameter(const std::vector<Parameter>& train, const Parameter& mu) {
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].size() != mu.size()) continue;
    bool same = true;
    for (std::size_t d = 0; d < mu.size(); ++d)
      same = same && std::abs(train[i][d] - mu[d]) <= 1e-12 * std::max(1.0, std::abs(mu[d]));
    if (same) return i;
  }
  return std::nullopt;
}

namespace {

struct SnapshotRun {
  std::vector<Vector> snapshots;
  int iterations = 0;
  double solve_seconds = 0.0;
  double snapshot_seconds = 0.0;
};

SnapshotRun generate_snapshots(const DiscreteOperators& ops, const Parameter& mu, const GreedyOptions& opts) {
  SnapshotRun run;
  auto t0 = Clock::now();
  const BoundOperators bound(ops, mu);
  const TransportOperator op(bound);
  DsaOperator dsa(bound, opts.dsa);
  KrylovState state;
  const SolveReport rep = fgmres(op, dsa, opts.fom, Vector(), &state);
  if (!rep.converged) spdlog::warn("greedy: FGMRES-DSA did not converge at a sampled parameter");
  run.iterations = rep.iterations;
  run.solve_seconds = seconds_since(t0);
  t0 = Clock::now();
  const CorrectionHistory hist = xi_recurrence(state, rep.phi, Vector(), opts.window);
  run.snapshots = correction_snapshots(op, hist);
  run.snapshot_seconds = seconds_since(t0);
  return run;
}

}  // namespace

GreedyResult greedy_train(const DiscreteOperators& ops, const std::vector<Parameter>& train,
                          const GreedyOptions& opts) {
  if (train.empty()) throw ConfigError("greedy_train: empty training set");
  if (opts.window < 1) throw ConfigError("greedy_train: window must be at least 1");
  if (opts.initial_sample >= train.size()) throw ConfigError("greedy_train: initial sample index out of range");
  if (opts.max_greedy < 1) throw ConfigError("greedy_train: max_greedy must be at least 1");

  const auto t_start = Clock::now();
  GreedyResult res;
  res.basis = ReducedBasis(ops);
  res.basis.window = opts.window;
  res.basis.eps_rom = opts.eps_rom;
  res.basis.eps_qr = opts.eps_qr;
  res.basis.prenormalize = opts.prenormalize;

  // Step 1: right-hand sides and first-iteration correction sources for every parameter.
  auto t0 = Clock::now();
  std::vector<Vector> eta0(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const BoundOperators bound(ops, train[i]);
    const TransportOperator op(bound);
    eta0[i] = bound.apply_sigma_s(op.rhs_tilde());
  }
  res.timings.step1 = seconds_since(t0);

  std::vector<bool> sampled(train.size(), false);
  std::size_t k = opts.initial_sample;
  for (int it = 1;; ++it) {
    // Step 2: full-order solve, snapshots, basis update.
    const SnapshotRun run = generate_snapshots(ops, train[k], opts);
    res.timings.step2a += run.solve_seconds;
    res.timings.step2b += run.snapshot_seconds;
    res.fom_iterations += run.iterations;
    t0 = Clock::now();
    int added = 0;
    for (const Vector& s : run.snapshots) added += res.basis.ingest(ops, s) ? 1 : 0;
    res.timings.step2c += seconds_since(t0);
    sampled[k] = true;
    res.sampled.push_back(k);
    res.basis.samples.push_back(train[k]);
    spdlog::info("greedy {}: sampled parameter {} ({} FGMRES iterations), basis {} (+{})", it, k, run.iterations,
                 res.basis.size(), added);
    if (it == opts.max_greedy) {
      spdlog::warn("greedy: reached {} iterations without meeting eps_rom", opts.max_greedy);
      break;
    }

    // Step 3: residual indicator over the unsampled parameters.
    t0 = Clock::now();
    double worst = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (sampled[i]) continue;
      const BoundOperators bound(ops, train[i]);
      const double R = rom_indicator(res.basis, bound, eta0[i]);
      if (R > worst) {
        worst = R;
        arg = i;
      }
    }
    res.timings.step3 += seconds_since(t0);
    if (worst < 0.0) {
      res.converged = true;
      break;
    }
    res.max_indicator.push_back(worst);
    spdlog::info("greedy {}: max indicator {:.3e} at parameter {}", it, worst, arg);
    if (worst < opts.eps_rom) {
      res.converged = true;
      break;
    }
    k = arg;
  }
  res.timings.total = seconds_since(t_start);
  if (opts.measure_all_snapshots) res.timings.all_snapshots = time_all_snapshots(ops, train, opts);
  return res;
}

double time_all_snapshots(const DiscreteOperators& ops, const std::vector<Parameter>& train,
                          const GreedyOptions& opts) {
  const auto t0 = Clock::now();
  for (const Parameter& mu : train) {
    const SnapshotRun run = generate_snapshots(ops, mu, opts);
    (void)run;
  }
  return seconds_since(t0);
}

}  // namespace rtrom
