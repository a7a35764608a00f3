#include "qguess/recovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace qguess {

namespace {

// tr_first of an operator on (first, second) with the given dims.
CMatrix trace_first(const CMatrix& x, Eigen::Index d_first, Eigen::Index d_second) {
  CMatrix out = CMatrix::Zero(d_second, d_second);
  for (Eigen::Index a = 0; a < d_first; ++a) {
    out += x.block(a * d_second, a * d_second, d_second, d_second);
  }
  return out;
}

CMatrix identity_kron(Eigen::Index d_first, const CMatrix& m) {
  const Eigen::Index n = m.rows();
  CMatrix out = CMatrix::Zero(d_first * n, d_first * n);
  for (Eigen::Index a = 0; a < d_first; ++a) out.block(a * n, a * n, n, n) = m;
  return out;
}

std::string fresh_label(const LabeledState& s, std::string base) {
  while (s.has(base)) base += "_";
  return base;
}

LabeledState ensure_pure(const LabeledState& psi) {
  if (psi.is_pure()) return psi;
  return purify(psi, fresh_label(psi, "R"));
}

struct ChoiBounds {
  double primal;
  double dual;
};

// Dual feasible sigma from the stationarity condition sigma = tr_A(J rho),
// shifted so that 1 (x) sigma >= rho.
ChoiBounds certify_choi(const CMatrix& rho, const CMatrix& j, Eigen::Index da, Eigen::Index dc) {
  const CMatrix jr = j * rho;
  CMatrix sigma = hermitian_part(trace_first(jr, da, dc));
  const double shift = std::max(0.0, -min_eigenvalue(identity_kron(da, sigma) - rho));
  return {jr.trace().real(), sigma.trace().real() + shift * static_cast<double>(dc)};
}

// sum_z tr sqrt(sqrt(sigma) rho_z sqrt(sigma)), together with the summed
// square roots.
double root_fidelity_sum(const std::vector<CMatrix>& states, const CMatrix& sigma, CMatrix* sum) {
  const CMatrix sh = psd_sqrt(sigma);
  CMatrix t = CMatrix::Zero(sigma.rows(), sigma.cols());
  for (const auto& rho : states) t += psd_sqrt(hermitian_part(sh * rho * sh));
  if (sum) *sum = hermitian_part(t);
  return t.trace().real();
}

constexpr double kSigmaConditionFloor = 1e-11;

// Upper bound on the concave maximum from the linearization at sigma:
// f* <= f(sigma) + lambda_max(grad) - tr(grad sigma). Requires sigma > 0.
double linearized_upper(const std::vector<CMatrix>& states, const CMatrix& sigma, double scale,
                        double* value) {
  const auto e = herm_eig(sigma);
  // sigma^{-1/2} amplifies roundoff in nearly singular directions.
  if (e.values(0) <= kSigmaConditionFloor * e.values.maxCoeff()) return 1.0;
  const RVector inv_sqrt = e.values.cwiseSqrt().cwiseInverse();
  const CMatrix sih = e.vectors * inv_sqrt.asDiagonal() * e.vectors.adjoint();
  CMatrix t;
  const double f = scale * root_fidelity_sum(states, sigma, &t);
  const CMatrix grad = hermitian_part(0.5 * scale * sih * t * sih);
  if (value) *value = f;
  return f + max_eigenvalue(grad) - (grad * sigma).trace().real();
}

constexpr int kSigmaAscentCap = 500;
const char* const kPurifier = "R";

// sum_z |z>_A |z>_Ap |phi_z>_{E R} with phi_z = (sqrt(rho_z) (x) I)|Omega>,
// reduced to (A, Ap, R). Only the diagonal (z, z) blocks of A Ap survive.
LabeledState cq_purification(const std::vector<CMatrix>& states, Eigen::Index k) {
  const auto d = static_cast<Eigen::Index>(states.size());
  CMatrix rho = CMatrix::Zero(d * d * k, d * d * k);
  std::vector<CMatrix> roots;
  for (const auto& r : states) roots.push_back(psd_sqrt(r));
  for (Eigen::Index z = 0; z < d; ++z) {
    for (Eigen::Index w = 0; w < d; ++w) {
      // tr_E |phi_z><phi_w| = (sqrt(rho_w)^dagger sqrt(rho_z))^T
      rho.block((z * d + z) * k, (w * d + w) * k, k, k) =
          (roots[static_cast<std::size_t>(w)].adjoint() * roots[static_cast<std::size_t>(z)])
              .transpose();
    }
  }
  return LabeledState::density(hermitian_part(rho),
                               {{labels::A, static_cast<int>(d)},
                                {labels::Ap, static_cast<int>(d)},
                                {kPurifier, static_cast<int>(k)}});
}

}  // namespace

Isometry coherent_isometry(const Povm& povm, const std::string& register_label) {
  validate_povm(povm);
  const auto k = static_cast<Eigen::Index>(povm.outcomes());
  const auto n = static_cast<Eigen::Index>(povm.dim());
  CMatrix m(k * n, n);
  for (Eigen::Index i = 0; i < k; ++i) {
    m.block(i * n, 0, n, n) = psd_sqrt(povm.elements[static_cast<std::size_t>(i)]);
  }
  Systems out{{register_label, static_cast<int>(k)}};
  out.insert(out.end(), povm.systems.begin(), povm.systems.end());
  return Operator(std::move(m), povm.systems, std::move(out));
}

RecoveryCircuit build_recovery(const LabeledState& psi, const Povm& lambda, const Povm& gamma,
                               const std::string& a) {
  const int d = psi.system(a).dim;
  if (lambda.outcomes() != static_cast<std::size_t>(d) ||
      gamma.outcomes() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("build_recovery: both POVMs need d outcomes");
  }
  for (const auto& s : lambda.systems) {
    if (s.name == a) throw std::invalid_argument("build_recovery: Lambda must act on Bob's side");
    if (psi.system(s.name) != s) throw std::invalid_argument("build_recovery: dimension mismatch");
  }
  Systems expected{{labels::Ap, d}};
  expected.insert(expected.end(), lambda.systems.begin(), lambda.systems.end());
  auto sorted = [](Systems s) {
    std::sort(s.begin(), s.end(), [](auto& x, auto& y) { return x.name < y.name; });
    return s;
  };
  if (sorted(gamma.systems) != sorted(expected)) {
    throw std::invalid_argument("build_recovery: Gamma must act on (Ap, Bob)");
  }
  RecoveryCircuit c{coherent_isometry(lambda, labels::Ap), coherent_isometry(gamma, labels::App),
                    controlled_phase(d, labels::App, labels::Ap),
                    Operator::identity({})};
  c.composed = compose(c.phase, compose(c.v_x, c.v_z));
  return c;
}

double circuit_fidelity(const LabeledState& psi, const RecoveryCircuit& circuit,
                        const std::string& a) {
  const LabeledState p = ensure_pure(psi);
  const int d = p.system(a).dim;
  const LabeledState target = apply(w_operator(d, a, labels::Ap, labels::App), p);
  const LabeledState recovered = apply(circuit.composed, p);
  return std::min(1.0, std::abs(inner_product(target, recovered)));
}

CircuitChain circuit_chain(const LabeledState& psi, const RecoveryCircuit& circuit,
                           const std::string& a) {
  const LabeledState p = ensure_pure(psi);
  const int d = p.system(a).dim;
  const LabeledState pz = psi_z(p, a, labels::Ap);
  CircuitChain chain{};
  chain.total = circuit_fidelity(p, circuit, a);
  chain.z_step = std::min(1.0, std::abs(inner_product(pz, apply(circuit.v_z, p))));
  chain.x_step = std::min(
      1.0, std::abs(inner_product(apply(u_x(d, a, labels::App), pz), apply(circuit.v_x, pz))));
  return chain;
}

RecoveryFidelity max_recovery_fidelity(const LabeledState& psi, const std::string& a,
                                       const LabelList& bob, const AscentOptions& opts) {
  if (std::find(bob.begin(), bob.end(), a) != bob.end()) {
    throw std::invalid_argument("max_recovery_fidelity: Bob's systems must exclude A");
  }
  LabelList keep{a};
  keep.insert(keep.end(), bob.begin(), bob.end());
  const LabeledState reduced = partial_trace(psi, keep);
  const CMatrix rho = reduced.density_matrix();
  const Eigen::Index da = psi.system(a).dim;
  const Eigen::Index dc = rho.rows() / da;
  const double d = static_cast<double>(da);

  // Start from the Petz-type recovery of the reduced state.
  CMatrix kernel;
  const CMatrix s = psd_inv_sqrt(trace_first(rho, da, dc), opts.pinv_cutoff, &kernel);
  CMatrix j = hermitian_part(identity_kron(da, s) * rho * identity_kron(da, s));
  for (Eigen::Index x = 0; x < da; ++x) j.block(x * dc, x * dc, dc, dc) += kernel / d;

  ChoiBounds b = certify_choi(rho, j, da, dc);
  double best_primal = b.primal;
  double best_dual = b.dual;
  CMatrix best_j = j;
  double previous = b.primal;
  int it = 0;
  bool converged = false;
  auto width = [&] {
    return std::sqrt(std::max(0.0, best_dual) / d) - std::sqrt(std::max(0.0, best_primal) / d);
  };
  if (width() <= opts.tol) converged = true;
  while (!converged && it < opts.max_iterations) {
    ++it;
    const CMatrix t = hermitian_part(rho * j * rho);
    CMatrix ker;
    const CMatrix g = psd_inv_sqrt(hermitian_part(trace_first(t, da, dc)), opts.pinv_cutoff, &ker);
    const CMatrix lift = identity_kron(da, g);
    j = hermitian_part(lift * t * lift);
    for (Eigen::Index x = 0; x < da; ++x) j.block(x * dc, x * dc, dc, dc) += ker / d;

    b = certify_choi(rho, j, da, dc);
    if (b.primal > best_primal) {
      best_primal = b.primal;
      best_j = j;
    }
    best_dual = std::min(best_dual, b.dual);
    const bool stalled =
        std::abs(b.primal - previous) < opts.improvement_tol * std::max(1e-300, std::abs(b.primal));
    previous = b.primal;
    if (width() <= opts.tol && stalled) converged = true;
  }
  if (width() <= opts.tol) converged = true;

  RecoveryFidelity out;
  out.value.lower = std::sqrt(std::max(0.0, best_primal) / d);
  out.value.upper = std::min(1.0, std::sqrt(std::max(0.0, best_dual) / d));
  out.value.iterations = it;
  out.value.converged = converged;
  out.channel.choi = best_j.transpose();
  out.channel.out_systems = {{labels::Ap, static_cast<int>(da)}};
  out.channel.in_systems = partial_trace(reduced, bob).systems();
  out.channel.trace_preservation_residual =
      (trace_first(out.channel.choi, da, dc) - CMatrix::Identity(dc, dc)).norm();
  return out;
}

LabeledState apply_channel(const ChannelChoi& channel, const LabeledState& psi,
                           const std::string& a, const LabelList& bob,
                           const std::string& out_label) {
  LabelList keep{a};
  keep.insert(keep.end(), bob.begin(), bob.end());
  const CMatrix rho = partial_trace(psi, keep).density_matrix();
  const Eigen::Index da = psi.system(a).dim;
  const Eigen::Index dc = rho.rows() / da;
  const auto dout = static_cast<Eigen::Index>(total_dim(channel.out_systems));
  if (channel.choi.rows() != dout * dc) {
    throw std::invalid_argument("apply_channel: channel input does not match Bob's systems");
  }
  CMatrix out = CMatrix::Zero(da * dout, da * dout);
  for (Eigen::Index x = 0; x < da; ++x) {
    for (Eigen::Index y = 0; y < da; ++y) {
      for (Eigen::Index p = 0; p < dout; ++p) {
        for (Eigen::Index q = 0; q < dout; ++q) {
          cplx acc = 0;
          for (Eigen::Index i = 0; i < dc; ++i) {
            for (Eigen::Index k = 0; k < dc; ++k) {
              acc += rho(x * dc + i, y * dc + k) * channel.choi(p * dc + i, q * dc + k);
            }
          }
          out(x * dout + p, y * dout + q) = acc;
        }
      }
    }
  }
  return LabeledState::density_unchecked(
      std::move(out), {psi.system(a), {out_label, static_cast<int>(dout)}});
}

double q_fidelity(const LabeledState& psi, const std::string& measured, Basis basis,
                  const LabelList& versus) {
  const Ensemble e = conditional_ensemble(psi, measured, basis, versus);
  const auto n = static_cast<Eigen::Index>(e.dim());
  CMatrix marginal = CMatrix::Zero(n, n);
  for (const auto& rho : e.states) marginal += rho;
  const CMatrix product = marginal / static_cast<double>(e.outcomes());
  // Both states are block diagonal in the measured register.
  double f = 0.0;
  for (const auto& rho : e.states) f += fidelity(rho, product);
  return std::min(1.0, f);
}

FidelityEnclosure max_sigma_fidelity(const LabeledState& psi, const std::string& measured,
                                     Basis basis, const LabelList& env,
                                     const AscentOptions& opts) {
  const Ensemble e = conditional_ensemble(psi, measured, basis, env);
  const double scale = 1.0 / std::sqrt(static_cast<double>(e.outcomes()));
  const auto n = static_cast<Eigen::Index>(e.dim());
  CMatrix marginal = CMatrix::Zero(n, n);
  for (const auto& rho : e.states) marginal += rho;

  // The optimal sigma lives on the support of the environment marginal.
  const auto me = herm_eig(marginal);
  const double top = me.values.maxCoeff();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (me.values(i) > 1e-13 * top) support.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(support.size());
  CMatrix basis_vecs(n, k);
  RVector weights(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    basis_vecs.col(i) = me.vectors.col(support[static_cast<std::size_t>(i)]);
    weights(i) = me.values(support[static_cast<std::size_t>(i)]);
  }
  std::vector<CMatrix> states;
  for (const auto& rho : e.states) {
    states.push_back(hermitian_part(basis_vecs.adjoint() * rho * basis_vecs));
  }

  FidelityEnclosure out;
  if (k == 1) {
    const CMatrix one = CMatrix::Identity(1, 1);
    out.lower = out.upper = std::min(1.0, scale * root_fidelity_sum(states, one, nullptr));
    out.converged = true;
    return out;
  }

  // Start at the actual marginal; its value is the plain Q fidelity.
  CMatrix sigma = (weights / weights.sum()).cast<cplx>().asDiagonal();
  double best_lower = 0.0;
  double best_upper = 1.0;
  double previous = 0.0;
  double previous_upper = 1.0;
  CMatrix t;
  int it = 0;
  const int cap = std::min(opts.max_iterations, kSigmaAscentCap);
  for (; it <= cap; ++it) {
    const double f = scale * root_fidelity_sum(states, sigma, &t);
    best_lower = std::max(best_lower, f);
    best_upper = std::min(best_upper, linearized_upper(states, sigma, scale, nullptr));
    // The bound converges more slowly than the value; both must stall.
    const bool stalled = std::abs(f - previous) < opts.improvement_tol * f &&
                         previous_upper - best_upper < opts.improvement_tol * f;
    previous = f;
    previous_upper = best_upper;
    if (best_upper - best_lower <= opts.tol || (stalled && it > 0)) break;
    // Stationarity: sum_z sqrt(sqrt(s) rho_z sqrt(s)) is proportional to s.
    sigma = t / t.trace().real();
  }
  // The linearization is steep near singular sigma; nudging towards the
  // maximally mixed state often tightens it.
  for (double eps : std::array<double, 5>{1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    const CMatrix mixed =
        (1.0 - eps) * sigma + eps * CMatrix::Identity(k, k) / static_cast<double>(k);
    double f = 0.0;
    best_upper = std::min(best_upper, linearized_upper(states, mixed, scale, &f));
    best_lower = std::max(best_lower, f);
  }
  out.iterations = it;
  if (best_upper - best_lower > opts.tol) {
    // The optimum can sit on the boundary, where the ascent crawls. By duality
    // the same number is F(A|A'R) on a purification of the cq state, which
    // the recovery solver certifies quickly; intersect both enclosures.
    const RecoveryFidelity dual = max_recovery_fidelity(
        cq_purification(states, basis_vecs.cols()), labels::A, {labels::Ap, kPurifier}, opts);
    best_lower = std::max(best_lower, dual.value.lower);
    best_upper = std::min(best_upper, dual.value.upper);
    out.iterations += dual.value.iterations;
  }
  out.lower = std::min(1.0, best_lower);
  out.upper = std::min(1.0, best_upper);
  out.upper = std::max(out.upper, out.lower);
  out.converged = out.width() <= opts.tol;
  return out;
}

}  // namespace qguess
