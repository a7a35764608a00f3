#include "qguess/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace qguess {

namespace {

constexpr double kEnsembleTraceTol = 1e-10;

struct Bounds {
  double primal;
  double dual;
  CMatrix dual_op;
};

// Dual certificate from a candidate POVM: Y = herm(sum Lambda_m rho_m) shifted
// by the smallest multiple of identity that makes Y >= rho_m for all m.
Bounds certify(const Ensemble& e, const std::vector<CMatrix>& povm) {
  const auto n = static_cast<Eigen::Index>(e.dim());
  CMatrix y = CMatrix::Zero(n, n);
  double primal = 0.0;
  for (std::size_t m = 0; m < e.outcomes(); ++m) {
    const CMatrix prod = povm[m] * e.states[m];
    y += prod;
    primal += prod.trace().real();
  }
  y = hermitian_part(y);
  double shift = 0.0;
  for (const auto& rho : e.states) shift = std::max(shift, -min_eigenvalue(y - rho));
  y += shift * CMatrix::Identity(n, n);
  return {primal, y.trace().real(), std::move(y)};
}

GuessCertificate scalar_solve(const Ensemble& e) {
  // One-dimensional guessing space: guess the likeliest outcome.
  std::size_t best = 0;
  for (std::size_t m = 1; m < e.outcomes(); ++m) {
    if (e.states[m](0, 0).real() > e.states[best](0, 0).real()) best = m;
  }
  GuessCertificate c;
  c.povm.systems = e.systems;
  for (std::size_t m = 0; m < e.outcomes(); ++m) {
    c.povm.elements.push_back(CMatrix::Constant(1, 1, m == best ? 1.0 : 0.0));
  }
  c.p_primal = c.p_dual = e.states[best](0, 0).real();
  c.dual_op = CMatrix::Constant(1, 1, c.p_dual);
  c.gap = 0.0;
  c.pgm_value = success_probability(e, pretty_good_measurement(e));
  c.converged = true;
  return c;
}

}  // namespace

double completeness_defect(const Povm& povm) {
  const auto n = static_cast<Eigen::Index>(povm.dim());
  CMatrix sum = CMatrix::Zero(n, n);
  for (const auto& el : povm.elements) sum += el;
  return (sum - CMatrix::Identity(n, n)).norm();
}

double min_element_eigenvalue(const Povm& povm) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& el : povm.elements) lo = std::min(lo, min_eigenvalue(el));
  return lo;
}

void validate_povm(const Povm& povm, double psd_tol, double sum_tol) {
  validate_systems(povm.systems);
  if (povm.elements.empty()) throw std::invalid_argument("POVM has no elements");
  const auto n = static_cast<Eigen::Index>(povm.dim());
  for (const auto& el : povm.elements) {
    if (el.rows() != n || el.cols() != n) {
      throw std::invalid_argument("POVM element does not match its systems");
    }
  }
  if (min_element_eigenvalue(povm) < -psd_tol) {
    throw std::invalid_argument("POVM element is not positive semidefinite");
  }
  if (completeness_defect(povm) > sum_tol) {
    throw std::invalid_argument("POVM elements do not sum to identity");
  }
}

void validate_ensemble(const Ensemble& e) {
  validate_systems(e.systems);
  if (e.states.empty()) throw std::invalid_argument("ensemble is empty");
  const auto n = static_cast<Eigen::Index>(e.dim());
  double total = 0.0;
  for (const auto& rho : e.states) {
    if (rho.rows() != n || rho.cols() != n) {
      throw std::invalid_argument("ensemble state does not match its systems");
    }
    if (min_eigenvalue(rho) < -kPsdClampTol) {
      throw std::invalid_argument("ensemble state is not positive semidefinite");
    }
    total += rho.trace().real();
  }
  if (std::abs(total - 1.0) > kEnsembleTraceTol) {
    throw std::invalid_argument("ensemble weights do not sum to one");
  }
}

Ensemble conditional_ensemble(const LabeledState& psi, const std::string& measured,
                              Basis basis, const LabelList& guess_from) {
  if (std::find(guess_from.begin(), guess_from.end(), measured) != guess_from.end()) {
    throw std::invalid_argument("guessing systems must not include the measured system");
  }
  const int d = psi.system(measured).dim;
  Ensemble out;
  for (const auto& name : guess_from) out.systems.push_back(psi.system(name));
  validate_systems(out.systems);
  const auto dg = static_cast<Eigen::Index>(out.dim());
  const CMatrix u = basis_matrix(d, basis);

  LabelList front{measured};
  front.insert(front.end(), guess_from.begin(), guess_from.end());

  if (psi.is_pure()) {
    LabelList order = front;
    for (const auto& s : psi.systems()) {
      if (std::find(front.begin(), front.end(), s.name) == front.end()) order.push_back(s.name);
    }
    const LabeledState p = permute_systems(psi, order);
    const auto dr = static_cast<Eigen::Index>(psi.dim()) / (d * dg);
    Eigen::Map<const CMatrix> v(p.vector().data(), dg * dr, d);
    const CMatrix projected = v * u.conjugate();
    for (int m = 0; m < d; ++m) {
      Eigen::Map<const CMatrix> r(projected.col(m).data(), dr, dg);
      out.states.push_back(hermitian_part(r.transpose() * r.conjugate()));
    }
    return out;
  }

  const CMatrix rho = partial_trace(psi, front).density_matrix();
  CMatrix rot = CMatrix::Zero(d * dg, d * dg);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      rot.block(i * dg, j * dg, dg, dg) = u(i, j) * CMatrix::Identity(dg, dg);
    }
  }
  const CMatrix rotated = rot.adjoint() * rho * rot;
  for (int m = 0; m < d; ++m) {
    out.states.push_back(hermitian_part(rotated.block(m * dg, m * dg, dg, dg)));
  }
  return out;
}

double success_probability(const Ensemble& e, const Povm& povm) {
  if (povm.outcomes() != e.outcomes() || povm.dim() != e.dim()) {
    throw std::invalid_argument("POVM does not match ensemble");
  }
  double p = 0.0;
  for (std::size_t m = 0; m < e.outcomes(); ++m) {
    p += (povm.elements[m] * e.states[m]).trace().real();
  }
  return p;
}

Povm pretty_good_measurement(const Ensemble& e, double pinv_cutoff) {
  const auto n = static_cast<Eigen::Index>(e.dim());
  CMatrix total = CMatrix::Zero(n, n);
  for (const auto& rho : e.states) total += rho;
  CMatrix kernel;
  const CMatrix inv_sqrt = psd_inv_sqrt(total, pinv_cutoff, &kernel);
  const double share = 1.0 / static_cast<double>(e.outcomes());
  Povm povm{e.systems, {}};
  for (const auto& rho : e.states) {
    povm.elements.push_back(hermitian_part(inv_sqrt * rho * inv_sqrt + share * kernel));
  }
  return povm;
}

GuessCertificate guess_prob(const Ensemble& e, const SolverOptions& opts) {
  validate_ensemble(e);
  if (opts.tol <= 0) throw std::invalid_argument("solver tolerance must be positive");
  if (e.dim() == 1) return scalar_solve(e);

  const auto n = static_cast<Eigen::Index>(e.dim());
  const std::size_t outcomes = e.outcomes();
  const double share = 1.0 / static_cast<double>(outcomes);

  GuessCertificate best;
  best.povm = pretty_good_measurement(e, opts.pinv_cutoff);
  Bounds b = certify(e, best.povm.elements);
  best.pgm_value = b.primal;
  best.p_primal = b.primal;
  best.p_dual = b.dual;
  best.dual_op = b.dual_op;

  // Always guessing the a-priori likeliest outcome is a valid fallback.
  {
    std::size_t top = 0;
    for (std::size_t m = 1; m < outcomes; ++m) {
      if (e.states[m].trace().real() > e.states[top].trace().real()) top = m;
    }
    const double trivial = e.states[top].trace().real();
    if (trivial > best.p_primal) {
      best.p_primal = trivial;
      best.povm.elements.assign(outcomes, CMatrix::Zero(n, n));
      best.povm.elements[top] = CMatrix::Identity(n, n);
    }
  }

  std::vector<CMatrix> povm = pretty_good_measurement(e, opts.pinv_cutoff).elements;
  double previous = b.primal;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // Fixed point of the optimality condition Lambda_m = R^{-1} rho_m Lambda_m rho_m R^{-1}.
    std::vector<CMatrix> t(outcomes);
    CMatrix g = CMatrix::Zero(n, n);
    for (std::size_t m = 0; m < outcomes; ++m) {
      t[m] = e.states[m] * povm[m] * e.states[m];
      g += t[m];
    }
    CMatrix kernel;
    const CMatrix g_inv_sqrt = psd_inv_sqrt(hermitian_part(g), opts.pinv_cutoff, &kernel);
    for (std::size_t m = 0; m < outcomes; ++m) {
      povm[m] = hermitian_part(g_inv_sqrt * t[m] * g_inv_sqrt + share * kernel);
    }

    b = certify(e, povm);
    best.iterations = it;
    if (b.primal > best.p_primal) {
      best.p_primal = b.primal;
      best.povm.elements = povm;
    }
    if (b.dual < best.p_dual) {
      best.p_dual = b.dual;
      best.dual_op = b.dual_op;
    }
    best.gap = best.p_dual - best.p_primal;
    const bool stalled = std::abs(b.primal - previous) < opts.improvement_tol;
    previous = b.primal;
    if (best.gap <= opts.tol && stalled) {
      best.converged = true;
      break;
    }
  }
  best.gap = std::max(0.0, best.p_dual - best.p_primal);
  if (!best.converged && best.gap <= opts.tol) best.converged = true;
  return best;
}

GuessCertificate guess_prob(const LabeledState& psi, const std::string& measured, Basis basis,
                            const LabelList& guess_from, const SolverOptions& opts) {
  return guess_prob(conditional_ensemble(psi, measured, basis, guess_from), opts);
}

double helstrom(const CMatrix& rho0, const CMatrix& rho1) {
  const double weight = rho0.trace().real() + rho1.trace().real();
  return 0.5 * weight + 0.5 * herm_eig(rho0 - rho1).values.cwiseAbs().sum();
}

Povm shift_difference_measurement(const Povm& gamma, int d, const std::string& ap) {
  if (gamma.outcomes() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("shift_difference_measurement: Gamma must have d outcomes");
  }
  for (const auto& s : gamma.systems) {
    if (s.name == ap) throw std::invalid_argument("label collision on '" + ap + "'");
  }
  std::vector<CMatrix> proj;
  for (int x = 0; x < d; ++x) {
    const CVector k = fourier_ket(d, x);
    proj.push_back(k * k.adjoint());
  }
  const auto n = static_cast<Eigen::Index>(gamma.dim());
  Povm xi;
  xi.systems.push_back({ap, d});
  xi.systems.insert(xi.systems.end(), gamma.systems.begin(), gamma.systems.end());
  for (int x = 0; x < d; ++x) {
    CMatrix el = CMatrix::Zero(d * n, d * n);
    for (int xp = 0; xp < d; ++xp) {
      const CMatrix& p = proj[static_cast<std::size_t>(((xp - x) % d + d) % d)];
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          el.block(i * n, j * n, n, n) += p(i, j) * gamma.elements[static_cast<std::size_t>(xp)];
        }
      }
    }
    xi.elements.push_back(std::move(el));
  }
  return xi;
}

}  // namespace qguess
