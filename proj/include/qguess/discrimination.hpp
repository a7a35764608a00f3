#pragma once

// Optimal guessing probabilities as minimum-error discrimination, with
// two-sided certificates.

#include <string>
#include <vector>

#include "qguess/linalg.hpp"
#include "qguess/qops.hpp"

namespace qguess {

/// Positive operators on `systems`, one per outcome, summing to identity.
struct Povm {
  Systems systems;
  std::vector<CMatrix> elements;

  std::size_t outcomes() const { return elements.size(); }
  std::size_t dim() const { return total_dim(systems); }
};

// Frobenius norm of sum(elements) - 1.
double completeness_defect(const Povm& povm);
// Smallest eigenvalue over all elements.
double min_element_eigenvalue(const Povm& povm);
// Throws std::invalid_argument unless every element is PSD within psd_tol
// and the elements sum to identity within sum_tol.
void validate_povm(const Povm& povm, double psd_tol = 1e-10, double sum_tol = 1e-9);

/// Subnormalized conditional states rho_m on the guessing systems. The
/// weights are the traces; they sum to one.
struct Ensemble {
  Systems systems;
  std::vector<CMatrix> states;

  std::size_t outcomes() const { return states.size(); }
  std::size_t dim() const { return total_dim(systems); }
};

void validate_ensemble(const Ensemble& e);

// rho_m = (<m| (x) 1) psi (|m> (x) 1) reduced to `guess_from`, with m running
// over the chosen eigenbasis of `measured`. An empty `guess_from` gives 1x1
// states (the outcome distribution).
Ensemble conditional_ensemble(const LabeledState& psi, const std::string& measured,
                              Basis basis, const LabelList& guess_from);

struct SolverOptions {
  double tol = 1e-7;               // required certificate gap
  int max_iterations = 10000;
  double improvement_tol = 1e-12;  // primal improvement counted as stalled
  double pinv_cutoff = 1e-10;      // relative pseudo-inverse cutoff
};

/// Result of an optimal-guessing solve. The true optimum lies in
/// [p_primal, p_dual]; p_primal is achieved by `povm` and p_dual = tr(dual_op)
/// with dual_op >= rho_m for every m.
struct GuessCertificate {
  double p_primal = 0.0;
  double p_dual = 1.0;
  Povm povm;
  CMatrix dual_op;
  double gap = 1.0;
  double pgm_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

double success_probability(const Ensemble& e, const Povm& povm);

// Square-root measurement rho^{-1/2} rho_m rho^{-1/2}, with the kernel of rho
// shared equally among the outcomes.
Povm pretty_good_measurement(const Ensemble& e, double pinv_cutoff = 1e-10);

GuessCertificate guess_prob(const Ensemble& e, const SolverOptions& opts = {});
GuessCertificate guess_prob(const LabeledState& psi, const std::string& measured, Basis basis,
                            const LabelList& guess_from, const SolverOptions& opts = {});

// Optimal success probability for two subnormalized states:
// (tr rho0 + tr rho1)/2 + ||rho0 - rho1||_1 / 2.
double helstrom(const CMatrix& rho0, const CMatrix& rho1);

// Xi_x = sum_{x'} P~_{x'-x}^{ap} (x) Gamma_{x'}: reports the difference between
// Gamma's outcome and the X value of `ap`. Systems are (ap, gamma.systems...).
Povm shift_difference_measurement(const Povm& gamma, int d,
                                  const std::string& ap = labels::Ap);

}  // namespace qguess
