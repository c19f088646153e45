#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtrom/discretization.hpp"
#include "rtrom/dsa.hpp"
#include "rtrom/linalg.hpp"
#include "rtrom/solvers.hpp"
#include "rtrom/transport.hpp"

namespace rtrom {

/// Scalar-flux corrections xi^(l) = A~^{-1} v^(l) recovered from a converged FGMRES run.
struct CorrectionHistory {
  std::vector<Vector> xi;
  Vector phi;
  Vector phi0;
};

/// xi^(1) = (phi - phi0) / beta, then
/// xi^(l) = (z^(l-1) - sum_{i<l} H_{i,l-1} xi^(i)) / H_{l,l-1} for l = 2..window.
/// Stops early (with a warning) when H_{l,l-1} < 1e-14 or the run has too few iterations.
CorrectionHistory xi_recurrence(const KrylovState& state, const Vector& phi, const Vector& phi0, int window);

/// Angular-flux corrections delta psi^(l) = (D_j + Sigma_t)^{-1} Sigma_s xi^(l), one transport sweep each.
std::vector<Vector> correction_snapshots(const TransportOperator& op, const CorrectionHistory& hist);

/// One modified Gram-Schmidt pass of `candidate` against the columns of U.
/// Returns the normalized remainder if its norm exceeds eps_qr, else nothing.
/// An accepted remainder gets a second pass so that U stays orthonormal to roundoff.
std::optional<Vector> mgs_truncated(const Eigen::Ref<const Matrix>& U, Vector candidate, double eps_qr = 1e-13);

/// Orthonormal reduced basis of angular-flux corrections with its projected affine operators.
///
/// With U_j the rows of U for direction j, the projected angular system is
///   A_r(mu) = A_0 + sum_p a_p(mu) A_p,
///   A_0 = sum_j U_j^T D_j U_j,
///   A_p = sum_j U_j^T Sigma_t,p U_j - S_1^T Sigma_s,p S_w,
/// where S_1 = sum_j U_j and S_w = sum_j w_j U_j.
class ReducedBasis {
 public:
  ReducedBasis() = default;
  ReducedBasis(int num_directions, int num_dofs, int num_pieces, std::uint64_t discretization_hash);
  /// Empty basis shaped for `ops`.
  explicit ReducedBasis(const DiscreteOperators& ops);

  int num_directions() const { return num_directions_; }
  int num_dofs() const { return num_dofs_; }
  int num_pieces() const { return num_pieces_; }
  int size() const { return r_; }
  std::uint64_t discretization_hash() const { return hash_; }

  Eigen::Ref<const Matrix> U() const { return U_.leftCols(r_); }
  /// U_j, the rows of direction j.
  Eigen::Ref<const Matrix> block(int j) const;
  Eigen::Ref<const Matrix> S1() const { return S1_.leftCols(r_); }
  Eigen::Ref<const Matrix> Sw() const { return Sw_.leftCols(r_); }
  /// A_s, s = 0 for advection and s = 1..P for the cross-section pieces.
  const Matrix& affine(int s) const { return affine_[static_cast<std::size_t>(s)]; }

  /// sum_s coefficient_s A_s with coefficient_0 = 1 and the rest a_p(mu).
  Matrix reduced_operator(const std::vector<double>& piece_coefficients) const;

  /// Orthogonalizes a candidate against the basis and, if accepted, appends it
  /// and extends S_1, S_w and every A_s. Returns true if the basis grew.
  bool ingest(const DiscreteOperators& ops, const Vector& candidate);

  /// max |U^T U - I|.
  double orthogonality_error() const;

  /// Throws ValidationError if the basis was not built for `ops`.
  void validate(const DiscreteOperators& ops) const;

  // Training metadata, carried through basis files.
  int window = 0;
  double eps_rom = 0.0;
  double eps_qr = 1e-13;
  bool prenormalize = true;
  std::vector<Parameter> samples;

 private:
  friend ReducedBasis load_basis(const std::string& path);
  void reserve_columns(int cols);

  int num_directions_ = 0;
  int num_dofs_ = 0;
  int num_pieces_ = 0;
  std::uint64_t hash_ = 0;
  int r_ = 0;
  Matrix U_;
  Matrix S1_;
  Matrix Sw_;
  std::vector<Matrix> affine_;
};

/// First-iteration reduced correction at a bound parameter:
/// c = A_r(mu)^{-1} S_1^T rhs. Returns an empty vector for an empty basis.
Vector reduced_solve(const ReducedBasis& basis, const BoundOperators& bound, const Vector& rhs);

/// Greedy indicator max_j ||(D_j + Sigma_t) U_j c - Sigma_s S_w c - eta0||_2 with c = reduced_solve(eta0).
double rom_indicator(const ReducedBasis& basis, const BoundOperators& bound, const Vector& eta0);

/// ROM synthetic acceleration at one parameter:
///   M_ROM^{-1} r = r + S_w (U^T A_mu U)^{-1} S_1^T Sigma_s r.
/// Falls back to DSA when the reduced matrix is numerically singular.
class RomSaPreconditioner final : public Preconditioner {
 public:
  /// `fallback` may be null; a singular reduced matrix then throws NumericalError.
  RomSaPreconditioner(const ReducedBasis& basis, const BoundOperators& bound, DsaOperator* fallback = nullptr);

  Vector correction(const Vector& r) const;
  Vector apply(int iteration, const Vector& r) override;
  bool is_linear() const override { return true; }
  std::string label(int) const override { return singular_ ? "dsa_fallback" : "rom"; }

  const Matrix& reduced_matrix() const { return reduced_; }
  bool singular() const { return singular_; }

 private:
  const ReducedBasis* basis_;
  const BoundOperators* bound_;
  DsaOperator* fallback_;
  Matrix reduced_;
  Eigen::PartialPivLU<Matrix> lu_;
  bool singular_ = false;
};

/// M_j^{-1} = M_ROM^{-1} for j <= window, M_DSA^{-1} afterwards.
class RomsadPreconditioner final : public Preconditioner {
 public:
  RomsadPreconditioner(const ReducedBasis& basis, const BoundOperators& bound, DsaOperator& dsa, int window);

  Vector apply(int iteration, const Vector& r) override;
  bool is_linear() const override { return false; }
  std::string label(int iteration) const override;

  int window() const { return window_; }
  int rom_applications() const { return rom_applications_; }
  const RomSaPreconditioner& rom() const { return rom_; }

 private:
  RomSaPreconditioner rom_;
  DsaOperator* dsa_;
  int window_;
  int rom_applications_ = 0;
};

struct GreedyOptions {
  int window = 2;
  double eps_rom = 1e-8;
  int max_greedy = 50;
  /// Index into the training set of the first sample.
  std::size_t initial_sample = 0;
  bool prenormalize = true;
  double eps_qr = 1e-13;
  KrylovOptions fom{};
  DsaOptions dsa{};
  /// Also time snapshot generation for every training parameter.
  bool measure_all_snapshots = false;
};

/// Wall time of each greedy step in seconds.
struct GreedyTimings {
  double step1 = 0.0;
  double step2a = 0.0;
  double step2b = 0.0;
  double step2c = 0.0;
  double step3 = 0.0;
  double total = 0.0;
  /// Time to generate snapshots for the whole training set; negative if not measured.
  double all_snapshots = -1.0;

  double steps_sum() const { return step1 + step2a + step2b + step2c + step3; }
};

struct GreedyResult {
  ReducedBasis basis;
  std::vector<std::size_t> sampled;
  /// Largest indicator over unsampled parameters after each basis update.
  std::vector<double> max_indicator;
  GreedyTimings timings;
  bool converged = false;
  int fom_iterations = 0;
};

/// Greedy reduced-basis training over a training set (see GreedyOptions).
GreedyResult greedy_train(const DiscreteOperators& ops, const std::vector<Parameter>& train,
                          const GreedyOptions& opts);

/// Index of `mu` in `train` (within 1e-12 per component), or nothing.
std::optional<std::size_t> find_parameter(const std::vector<Parameter>& train, const Parameter& mu);

/// Seconds spent generating the window snapshots of every training parameter with FGMRES-DSA.
double time_all_snapshots(const DiscreteOperators& ops, const std::vector<Parameter>& train, const GreedyOptions& opts);

/// Basis file: magic "ROMB1\0", key=value manifest ending in "end", then
/// little-endian f64 column-major payloads U, S_1, S_w, A_0..A_P.
void save_basis(const ReducedBasis& basis, const std::string& path);
ReducedBasis load_basis(const std::string& path);
/// Loads and validates against the current discretization.
ReducedBasis load_basis(const std::string& path, const DiscreteOperators& ops);

}  // namespace rtrom
