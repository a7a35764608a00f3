#pragma once

// Entanglement recovery from guessing measurements: coherent measurement
// isometries, the three-stage recovery circuit, the optimal recovery fidelity
// F(A|B) and the decoupling fidelities Q.

#include <string>

#include "qguess/discrimination.hpp"
#include "qguess/linalg.hpp"
#include "qguess/qops.hpp"

namespace qguess {

/// V_Z (B -> Ap B), V_X (Ap B -> App Ap B), the controlled phase on (App, Ap),
/// and their product, which touches Bob's systems only.
struct RecoveryCircuit {
  Isometry v_z;
  Isometry v_x;
  Operator phase;
  Isometry composed;
};

/// Choi operator of a channel on (out, in) with the input identity residual.
struct ChannelChoi {
  CMatrix choi;
  Systems out_systems;
  Systems in_systems;
  double trace_preservation_residual = 0.0;
};

/// Certified interval around an optimum.
struct FidelityEnclosure {
  double lower = 0.0;
  double upper = 1.0;
  int iterations = 0;
  bool converged = false;

  double width() const { return upper - lower; }
};

struct RecoveryFidelity {
  FidelityEnclosure value;
  ChannelChoi channel;  // channel achieving `value.lower`
};

struct AscentOptions {
  double tol = 1e-7;              // required enclosure width
  int max_iterations = 10000;
  double improvement_tol = 1e-12; // relative improvement counted as stalled
  double pinv_cutoff = 1e-10;
};

// sum_m |m>^{reg} (x) sqrt(Lambda_m): povm.systems -> (reg, povm.systems...).
Isometry coherent_isometry(const Povm& povm, const std::string& register_label);

// Lambda guesses Z of `a` from Bob's systems (its own systems); Gamma guesses X
// from (Ap, Bob). Both need d outcomes, d = dim of `a` in psi.
RecoveryCircuit build_recovery(const LabeledState& psi, const Povm& lambda, const Povm& gamma,
                               const std::string& a = labels::A);

/// Fidelities along the recovery chain for one state.
struct CircuitChain {
  double total;   // F(W|psi>, V V_X V_Z |psi>)
  double x_step;  // F(U_X|psi_Z>, V_X|psi_Z>)
  double z_step;  // F(|psi_Z>, V_Z|psi>)
};

// |<psi| W^dagger V V_X V_Z |psi>|. Mixed inputs are purified on a fresh label.
double circuit_fidelity(const LabeledState& psi, const RecoveryCircuit& circuit,
                        const std::string& a = labels::A);
CircuitChain circuit_chain(const LabeledState& psi, const RecoveryCircuit& circuit,
                           const std::string& a = labels::A);

// F(A|B): max over channels Bob -> A' of F(Phi^{AA'}, (id (x) E)(psi^{A Bob})).
RecoveryFidelity max_recovery_fidelity(const LabeledState& psi, const std::string& a,
                                       const LabelList& bob, const AscentOptions& opts = {});

// (id (x) E)(psi^{A Bob}) for a channel given by its Choi operator; the output
// system takes `out_label`.
LabeledState apply_channel(const ChannelChoi& channel, const LabeledState& psi,
                           const std::string& a, const LabelList& bob,
                           const std::string& out_label = labels::Ap);

// Q(M^a|C) = F(psi_M^{aC}, pi^a (x) psi^C), M the chosen basis.
double q_fidelity(const LabeledState& psi, const std::string& measured, Basis basis,
                  const LabelList& versus);

// max over density operators sigma on `env` of F(psi_M^{a env}, pi^a (x) sigma).
// Systems other than `measured` and `env` are traced out.
FidelityEnclosure max_sigma_fidelity(const LabeledState& psi, const std::string& measured,
                                     Basis basis, const LabelList& env,
                                     const AscentOptions& opts = {});

}  // namespace qguess
