#include "qguess/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace qguess {

namespace {

constexpr double kPureNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kEigHermitianTol = 1e-10;

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

std::size_t position_of(const Systems& systems, std::string_view name) {
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (systems[i].name == name) return i;
  }
  throw std::invalid_argument("unknown system label '" + std::string(name) + "'");
}

// For each index of the reordered space, the index it came from.
std::vector<std::size_t> source_indices(const Systems& from, const LabelList& order,
                                        Systems& to) {
  if (order.size() != from.size()) {
    throw std::invalid_argument("permutation must list every system exactly once");
  }
  std::vector<std::size_t> pos;
  std::unordered_set<std::string> seen;
  for (const auto& name : order) {
    if (!seen.insert(name).second) {
      throw std::invalid_argument("permutation repeats label '" + name + "'");
    }
    pos.push_back(position_of(from, name));
  }
  std::vector<std::size_t> stride(from.size(), 1);
  for (std::size_t i = from.size(); i-- > 1;) {
    stride[i - 1] = stride[i] * static_cast<std::size_t>(from[i].dim);
  }
  to.clear();
  for (auto p : pos) to.push_back(from[p]);

  const std::size_t n = total_dim(from);
  std::vector<std::size_t> src(n);
  std::vector<int> digit(to.size(), 0);
  std::size_t s = 0;
  for (std::size_t j = 0; j < n; ++j) {
    src[j] = s;
    // Odometer increment over the new ordering, last label fastest.
    for (std::size_t k = to.size(); k-- > 0;) {
      if (++digit[k] < to[k].dim) {
        s += stride[pos[k]];
        break;
      }
      s -= static_cast<std::size_t>(digit[k] - 1) * stride[pos[k]];
      digit[k] = 0;
    }
  }
  return src;
}

CMatrix permute_rows_cols(const CMatrix& m, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

std::vector<std::size_t> identity_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Columns of `cols` are vectors laid out as (in, rest); returns the columns
// mapped by m (x) 1_rest, laid out as (out, rest).
CMatrix apply_to_columns(const CMatrix& m, const CMatrix& cols, Eigen::Index dim_rest) {
  const Eigen::Index dim_in = m.cols();
  const Eigen::Index dim_out = m.rows();
  CMatrix out(dim_out * dim_rest, cols.cols());
  const CMatrix mt = m.transpose();
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Eigen::Map<const CMatrix> r(cols.col(c).data(), dim_rest, dim_in);
    Eigen::Map<CMatrix> dst(out.col(c).data(), dim_rest, dim_out);
    dst.noalias() = r * mt;
  }
  return out;
}

struct Split {
  LabelList front;  // requested labels
  LabelList rest;   // the others, original order
};

Split split_labels(const Systems& systems, const LabelList& front) {
  std::unordered_set<std::string> wanted(front.begin(), front.end());
  if (wanted.size() != front.size()) throw std::invalid_argument("duplicate label in list");
  for (const auto& name : front) position_of(systems, name);
  Split s{front, {}};
  for (const auto& sys : systems) {
    if (!wanted.count(sys.name)) s.rest.push_back(sys.name);
  }
  return s;
}

LabelList concat(LabelList a, const LabelList& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Systems select(const Systems& systems, const LabelList& names) {
  Systems out;
  for (const auto& n : names) out.push_back(systems[position_of(systems, n)]);
  return out;
}

void check_disjoint(const Systems& a, const Systems& b) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x.name == y.name) throw std::invalid_argument("label collision on '" + x.name + "'");
    }
  }
}

// Clamps roundoff negatives; throws on genuinely negative eigenvalues.
RVector clamp_psd_eigenvalues(const RVector& values) {
  RVector out = values;
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < -kPsdErrorTol * scale) {
      throw std::domain_error("matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(out(i)) + ")");
    }
    if (out(i) < 0) out(i) = 0;
  }
  return out;
}

}  // namespace

std::size_t total_dim(const Systems& systems) {
  std::size_t n = 1;
  for (const auto& s : systems) n *= static_cast<std::size_t>(s.dim);
  return n;
}

LabelList names_of(const Systems& systems) {
  LabelList out;
  for (const auto& s : systems) out.push_back(s.name);
  return out;
}

void validate_systems(const Systems& systems) {
  std::unordered_set<std::string> seen;
  for (const auto& s : systems) {
    if (s.dim < 1) throw std::invalid_argument("system '" + s.name + "' has dim < 1");
    if (s.name.empty()) throw std::invalid_argument("empty system label");
    if (!seen.insert(s.name).second) {
      throw std::invalid_argument("duplicate system label '" + s.name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// LabeledState

LabeledState::LabeledState(Kind kind, CVector vec, CMatrix rho, Systems systems)
    : kind_(kind), vec_(std::move(vec)), rho_(std::move(rho)), systems_(std::move(systems)) {
  validate_systems(systems_);
  dim_ = total_dim(systems_);
  const auto n = static_cast<Eigen::Index>(dim_);
  if (kind_ == Kind::Pure ? vec_.size() != n : (rho_.rows() != n || rho_.cols() != n)) {
    throw std::invalid_argument("state data does not match subsystem dimensions");
  }
}

LabeledState LabeledState::pure(CVector amplitudes, Systems systems) {
  if (std::abs(amplitudes.norm() - 1.0) > kPureNormTol) {
    throw std::invalid_argument("pure state is not normalized");
  }
  return LabeledState(Kind::Pure, std::move(amplitudes), CMatrix(), std::move(systems));
}

LabeledState LabeledState::density(CMatrix rho, Systems systems) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix is not square");
  if (hermiticity_defect(rho) > kHermitianTol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > kTraceTol) {
    throw std::invalid_argument("density matrix does not have unit trace");
  }
  CMatrix h = hermitian_part(rho);
  if (h.rows() > 0 && min_eigenvalue(h) < -kPsdClampTol) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
  return LabeledState(Kind::Density, CVector(), std::move(h), std::move(systems));
}

LabeledState LabeledState::pure_unchecked(CVector amplitudes, Systems systems) {
  return LabeledState(Kind::Pure, std::move(amplitudes), CMatrix(), std::move(systems));
}

LabeledState LabeledState::density_unchecked(CMatrix rho, Systems systems) {
  return LabeledState(Kind::Density, CVector(), hermitian_part(rho), std::move(systems));
}

const CVector& LabeledState::vector() const {
  if (!is_pure()) throw std::logic_error("state is not pure");
  return vec_;
}

CMatrix LabeledState::density_matrix() const {
  if (is_pure()) return vec_ * vec_.adjoint();
  return rho_;
}

bool LabeledState::has(std::string_view name) const {
  return std::any_of(systems_.begin(), systems_.end(),
                     [&](const SystemLabel& s) { return s.name == name; });
}

const SystemLabel& LabeledState::system(std::string_view name) const {
  return systems_[position_of(systems_, name)];
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(CMatrix data, Systems in_systems, Systems out_systems)
    : data_(std::move(data)), in_(std::move(in_systems)), out_(std::move(out_systems)) {
  validate_systems(in_);
  validate_systems(out_);
  if (data_.rows() != static_cast<Eigen::Index>(total_dim(out_)) ||
      data_.cols() != static_cast<Eigen::Index>(total_dim(in_))) {
    throw std::invalid_argument("operator shape does not match its systems");
  }
}

Operator Operator::identity(const Systems& systems) {
  const auto n = static_cast<Eigen::Index>(total_dim(systems));
  return Operator(CMatrix::Identity(n, n), systems, systems);
}

Operator Operator::adjoint() const { return Operator(data_.adjoint(), out_, in_); }

double isometry_defect(const Operator& op) {
  const auto& m = op.matrix();
  return (m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols())).norm();
}

// ---------------------------------------------------------------------------
// Structural operations

LabeledState tensor(const LabeledState& a, const LabeledState& b) {
  check_disjoint(a.systems(), b.systems());
  Systems sys = a.systems();
  sys.insert(sys.end(), b.systems().begin(), b.systems().end());
  if (a.is_pure() && b.is_pure()) {
    return LabeledState::pure_unchecked(kron(a.vector(), b.vector()), std::move(sys));
  }
  return LabeledState::density_unchecked(kron(a.density_matrix(), b.density_matrix()),
                                         std::move(sys));
}

Operator tensor(const Operator& a, const Operator& b) {
  check_disjoint(a.in_systems(), b.in_systems());
  check_disjoint(a.out_systems(), b.out_systems());
  Systems in = a.in_systems();
  in.insert(in.end(), b.in_systems().begin(), b.in_systems().end());
  Systems out = a.out_systems();
  out.insert(out.end(), b.out_systems().begin(), b.out_systems().end());
  return Operator(kron(a.matrix(), b.matrix()), std::move(in), std::move(out));
}

LabeledState permute_systems(const LabeledState& state, const LabelList& order) {
  Systems to;
  const auto src = source_indices(state.systems(), order, to);
  if (state.is_pure()) {
    const CVector& v = state.vector();
    CVector out(v.size());
    for (std::size_t j = 0; j < src.size(); ++j) {
      out(static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(src[j]));
    }
    return LabeledState::pure_unchecked(std::move(out), std::move(to));
  }
  return LabeledState::density_unchecked(
      permute_rows_cols(state.density_matrix(), src, src), std::move(to));
}

Operator permute_systems(const Operator& op, const LabelList& in_order,
                         const LabelList& out_order) {
  Systems in, out;
  const auto cols = source_indices(op.in_systems(), in_order, in);
  const auto rows = source_indices(op.out_systems(), out_order, out);
  return Operator(permute_rows_cols(op.matrix(), rows, cols), std::move(in), std::move(out));
}

LabeledState partial_trace(const LabeledState& state, const LabelList& keep) {
  const Split split = split_labels(state.systems(), keep);
  const LabeledState p = permute_systems(state, concat(split.front, split.rest));
  const Systems kept = select(state.systems(), keep);
  const auto dk = static_cast<Eigen::Index>(total_dim(kept));
  const auto dr = static_cast<Eigen::Index>(state.dim()) / dk;
  CMatrix out;
  if (p.is_pure()) {
    Eigen::Map<const CMatrix> r(p.vector().data(), dr, dk);
    out = r.transpose() * r.conjugate();
  } else {
    const CMatrix rho = p.density_matrix();
    out = CMatrix::Zero(dk, dk);
    for (Eigen::Index k = 0; k < dk; ++k) {
      for (Eigen::Index l = 0; l < dk; ++l) {
        cplx acc = 0;
        for (Eigen::Index r = 0; r < dr; ++r) acc += rho(k * dr + r, l * dr + r);
        out(k, l) = acc;
      }
    }
  }
  return LabeledState::density_unchecked(std::move(out), kept);
}

LabeledState apply(const Operator& op, const LabeledState& state) {
  const Split split = split_labels(state.systems(), names_of(op.in_systems()));
  for (const auto& n : split.front) {
    if (state.system(n) != op.in_systems()[position_of(op.in_systems(), n)]) {
      throw std::invalid_argument("dimension mismatch on system '" + n + "'");
    }
  }
  const Systems rest = select(state.systems(), split.rest);
  check_disjoint(op.out_systems(), rest);
  Systems out_sys = op.out_systems();
  out_sys.insert(out_sys.end(), rest.begin(), rest.end());

  const LabeledState p = permute_systems(state, concat(split.front, split.rest));
  const auto dim_rest = static_cast<Eigen::Index>(total_dim(rest));
  if (p.is_pure()) {
    CMatrix col = apply_to_columns(op.matrix(), p.vector(), dim_rest);
    return LabeledState::pure_unchecked(col.col(0), std::move(out_sys));
  }
  const CMatrix half = apply_to_columns(op.matrix(), p.density_matrix(), dim_rest);
  const CMatrix half_adj = half.adjoint();
  return LabeledState::density_unchecked(apply_to_columns(op.matrix(), half_adj, dim_rest),
                                         std::move(out_sys));
}

Operator compose(const Operator& outer, const Operator& inner) {
  const Split split = split_labels(inner.out_systems(), names_of(outer.in_systems()));
  const Systems rest = select(inner.out_systems(), split.rest);
  check_disjoint(outer.out_systems(), rest);
  for (const auto& n : split.front) {
    if (inner.out_systems()[position_of(inner.out_systems(), n)] !=
        outer.in_systems()[position_of(outer.in_systems(), n)]) {
      throw std::invalid_argument("dimension mismatch on system '" + n + "'");
    }
  }
  Systems tmp;
  const auto rows = source_indices(inner.out_systems(), concat(split.front, split.rest), tmp);
  const CMatrix permuted =
      permute_rows_cols(inner.matrix(), rows, identity_indices(inner.matrix().cols()));
  Systems out_sys = outer.out_systems();
  out_sys.insert(out_sys.end(), rest.begin(), rest.end());
  return Operator(
      apply_to_columns(outer.matrix(), permuted, static_cast<Eigen::Index>(total_dim(rest))),
      inner.in_systems(), std::move(out_sys));
}

cplx inner_product(const LabeledState& a, const LabeledState& b) {
  const LabeledState bb = permute_systems(b, names_of(a.systems()));
  if (bb.systems() != a.systems()) throw std::invalid_argument("dimension mismatch");
  return a.vector().dot(bb.vector());
}

// ---------------------------------------------------------------------------
// Spectral functions

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

double hermiticity_defect(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition herm_eig(const CMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("herm_eig: matrix is not square");
  const double scale = h.size() ? std::max(1.0, h.cwiseAbs().maxCoeff()) : 1.0;
  if (hermiticity_defect(h) > kEigHermitianTol * scale) {
    throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw std::runtime_error("herm_eig: solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition herm_eig(const Operator& h) { return herm_eig(h.matrix()); }

double min_eigenvalue(const CMatrix& h) { return herm_eig(h).values(0); }

double max_eigenvalue(const CMatrix& h) {
  const auto e = herm_eig(h);
  return e.values(e.values.size() - 1);
}

CMatrix psd_sqrt(const CMatrix& p) {
  const auto e = herm_eig(p);
  const RVector lam = clamp_psd_eigenvalues(e.values).cwiseSqrt();
  return e.vectors * lam.asDiagonal() * e.vectors.adjoint();
}

Operator psd_sqrt(const Operator& p) {
  return Operator(psd_sqrt(p.matrix()), p.in_systems(), p.out_systems());
}

CMatrix psd_inv_sqrt(const CMatrix& p, double rel_cutoff, CMatrix* kernel) {
  const auto e = herm_eig(p);
  const double top = e.values.size() ? e.values.maxCoeff() : 0.0;
  RVector inv(e.values.size());
  RVector ker(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const bool keep = top > 0 && e.values(i) > rel_cutoff * top;
    inv(i) = keep ? 1.0 / std::sqrt(e.values(i)) : 0.0;
    ker(i) = keep ? 0.0 : 1.0;
  }
  if (kernel) *kernel = e.vectors * ker.asDiagonal() * e.vectors.adjoint();
  return e.vectors * inv.asDiagonal() * e.vectors.adjoint();
}

double trace_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return trace_norm(psd_sqrt(rho) * psd_sqrt(sigma));
}

double fidelity(const LabeledState& rho, const LabeledState& sigma) {
  const LabeledState s = permute_systems(sigma, names_of(rho.systems()));
  if (s.systems() != rho.systems()) throw std::invalid_argument("fidelity: dimension mismatch");
  double f = 0.0;
  if (rho.is_pure() && s.is_pure()) {
    f = std::abs(rho.vector().dot(s.vector()));
  } else if (rho.is_pure() || s.is_pure()) {
    const CVector& v = rho.is_pure() ? rho.vector() : s.vector();
    const CMatrix m = rho.is_pure() ? s.density_matrix() : rho.density_matrix();
    f = std::sqrt(std::max(0.0, v.dot(m * v).real()));
  } else {
    f = fidelity(rho.density_matrix(), s.density_matrix());
  }
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  return 0.5 * herm_eig(rho - sigma).values.cwiseAbs().sum();
}

double trace_distance(const LabeledState& rho, const LabeledState& sigma) {
  const LabeledState s = permute_systems(sigma, names_of(rho.systems()));
  if (s.systems() != rho.systems()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  return std::clamp(trace_distance(rho.density_matrix(), s.density_matrix()), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Purification and random states

LabeledState purify(const LabeledState& state, const std::string& new_label) {
  const auto n = static_cast<Eigen::Index>(state.dim());
  Systems sys = state.systems();
  sys.push_back({new_label, static_cast<int>(n)});
  validate_systems(sys);
  CVector out = CVector::Zero(n * n);
  if (state.is_pure()) {
    for (Eigen::Index i = 0; i < n; ++i) out(i * n) = state.vector()(i);
    return LabeledState::pure_unchecked(std::move(out), std::move(sys));
  }
  const auto e = herm_eig(state.density_matrix());
  const RVector lam = clamp_psd_eigenvalues(e.values);
  // Largest eigenvalue pairs with ancilla |0>.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    const double w = std::sqrt(lam(src));
    for (Eigen::Index i = 0; i < n; ++i) out(i * n + k) = w * e.vectors(i, src);
  }
  out.normalize();
  return LabeledState::pure_unchecked(std::move(out), std::move(sys));
}

LabeledState random_pure(const Systems& systems, std::uint64_t seed) {
  validate_systems(systems);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(total_dim(systems));
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = cplx(re, im);
  }
  v.normalize();
  return LabeledState::pure_unchecked(std::move(v), systems);
}

LabeledState random_density(const Systems& systems, int rank, std::uint64_t seed) {
  if (rank < 1 || static_cast<std::size_t>(rank) > total_dim(systems)) {
    throw std::invalid_argument("random_density: rank out of range");
  }
  std::string anc = "_anc";
  while (std::any_of(systems.begin(), systems.end(),
                     [&](const SystemLabel& s) { return s.name == anc; })) {
    anc += "_";
  }
  Systems ext = systems;
  ext.push_back({anc, rank});
  return partial_trace(random_pure(ext, seed), names_of(systems));
}

CVector basis_ket(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::out_of_range("basis index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

LabeledState basis_state(const Systems& systems, const std::vector<int>& digits) {
  if (digits.size() != systems.size()) throw std::invalid_argument("basis_state: digit count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= systems[i].dim) {
      throw std::out_of_range("basis_state: digit out of range");
    }
    idx = idx * static_cast<std::size_t>(systems[i].dim) + static_cast<std::size_t>(digits[i]);
  }
  return LabeledState::pure(basis_ket(total_dim(systems), idx), systems);
}

}  // namespace qguess
