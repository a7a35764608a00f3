#pragma once

// Dense complex linear algebra over labeled multipartite Hilbert spaces.
//
// Coefficient layout is row-major over the ordered label list with the last
// label varying fastest, i.e. the ordering produced by Kronecker products
// taken left to right. Every operator and state in the library uses it.

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qguess {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Eigenvalues in [-kPsdClampTol, 0) are treated as roundoff and set to zero.
inline constexpr double kPsdClampTol = 1e-10;
// Eigenvalues below -kPsdErrorTol make psd_sqrt and fidelity throw.
inline constexpr double kPsdErrorTol = 1e-8;

struct SystemLabel {
  std::string name;
  int dim = 1;

  friend bool operator==(const SystemLabel&, const SystemLabel&) = default;
};

using Systems = std::vector<SystemLabel>;
using LabelList = std::vector<std::string>;

std::size_t total_dim(const Systems& systems);
LabelList names_of(const Systems& systems);
// Throws std::invalid_argument on duplicate names or non-positive dims.
void validate_systems(const Systems& systems);

/// A normalized pure vector or density operator over labeled subsystems.
///
/// Construction validates: unit norm (pure, 1e-12), or Hermitian (1e-12),
/// trace one (1e-10) and eigenvalues >= -1e-10 (density). Instances are
/// immutable.
class LabeledState {
 public:
  enum class Kind { Pure, Density };

  static LabeledState pure(CVector amplitudes, Systems systems);
  static LabeledState density(CMatrix rho, Systems systems);
  // Skips normalization checks; used for intermediate results whose
  // invariants follow from construction (e.g. isometries applied to states).
  static LabeledState pure_unchecked(CVector amplitudes, Systems systems);
  static LabeledState density_unchecked(CMatrix rho, Systems systems);

  Kind kind() const { return kind_; }
  bool is_pure() const { return kind_ == Kind::Pure; }

  // Throws std::logic_error when the state is not pure.
  const CVector& vector() const;
  // Density matrix; computes |psi><psi| for pure states.
  CMatrix density_matrix() const;

  const Systems& systems() const { return systems_; }
  std::size_t dim() const { return dim_; }
  bool has(std::string_view name) const;
  const SystemLabel& system(std::string_view name) const;

 private:
  LabeledState(Kind kind, CVector vec, CMatrix rho, Systems systems);

  Kind kind_;
  CVector vec_;
  CMatrix rho_;
  Systems systems_;
  std::size_t dim_;
};

/// Linear map from the space of `in_systems` to that of `out_systems`.
/// The matrix has shape total_dim(out) x total_dim(in).
class Operator {
 public:
  Operator(CMatrix data, Systems in_systems, Systems out_systems);

  static Operator identity(const Systems& systems);

  const CMatrix& matrix() const { return data_; }
  const Systems& in_systems() const { return in_; }
  const Systems& out_systems() const { return out_; }

  Operator adjoint() const;

 private:
  CMatrix data_;
  Systems in_;
  Systems out_;
};

// Isometries are operators with V^dagger V = 1; see isometry_defect.
using Isometry = Operator;

// Frobenius norm of V^dagger V - 1.
double isometry_defect(const Operator& op);

LabeledState tensor(const LabeledState& a, const LabeledState& b);
Operator tensor(const Operator& a, const Operator& b);

// Reduced state on `keep`, with systems ordered as listed in `keep`.
LabeledState partial_trace(const LabeledState& state, const LabelList& keep);

LabeledState permute_systems(const LabeledState& state, const LabelList& order);
Operator permute_systems(const Operator& op, const LabelList& in_order,
                         const LabelList& out_order);

// Applies `op` to the systems it names (op.in must be present in the state).
// The result lists op.out first, then the untouched systems in their
// original order.
LabeledState apply(const Operator& op, const LabeledState& state);

// outer * inner, where outer's inputs are a subset of inner's outputs. The
// composite maps inner.in to outer.out followed by the untouched outputs.
Operator compose(const Operator& outer, const Operator& inner);

// <a|b> for pure states on the same label set (order may differ).
cplx inner_product(const LabeledState& a, const LabeledState& b);

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

EigenDecomposition herm_eig(const CMatrix& h);
EigenDecomposition herm_eig(const Operator& h);

CMatrix psd_sqrt(const CMatrix& p);
Operator psd_sqrt(const Operator& p);

// Moore-Penrose inverse square root of a PSD matrix. Eigenvalues at or below
// rel_cutoff * max eigenvalue are treated as zero; `kernel` (if non-null)
// receives the projector onto the discarded eigenspace.
CMatrix psd_inv_sqrt(const CMatrix& p, double rel_cutoff, CMatrix* kernel = nullptr);

CMatrix hermitian_part(const CMatrix& m);
double hermiticity_defect(const CMatrix& m);
double min_eigenvalue(const CMatrix& h);
double max_eigenvalue(const CMatrix& h);

// Sum of singular values.
double trace_norm(const CMatrix& m);

// Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1 for (possibly subnormalized)
// PSD matrices.
double fidelity(const CMatrix& rho, const CMatrix& sigma);
double fidelity(const LabeledState& rho, const LabeledState& sigma);

double trace_distance(const CMatrix& rho, const CMatrix& sigma);
double trace_distance(const LabeledState& rho, const LabeledState& sigma);

// Pure state on state.systems() + {new_label} whose reduction is `state`.
// The ancilla always has the full dimension of the input.
LabeledState purify(const LabeledState& state, const std::string& new_label);

LabeledState random_pure(const Systems& systems, std::uint64_t seed);
// Partial trace of a random pure state on systems + ancilla of dim `rank`.
LabeledState random_density(const Systems& systems, int rank, std::uint64_t seed);

CVector basis_ket(std::size_t dim, std::size_t index);
LabeledState basis_state(const Systems& systems, const std::vector<int>& digits);

}  // namespace qguess
