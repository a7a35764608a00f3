#include <cmath>

#include "qguess/recovery.hpp"
#include "support.hpp"

using namespace qguess;
using qtest::max_abs_diff;

namespace {

LabeledState random_ab(int d, int db, std::uint64_t seed) {
  return partial_trace(random_pure({{"A", d}, {"B", db}, {"E", d}}, seed), {"A", "B"});
}

// <Phi| M (x) N |Phi> = tr[M^T N] / d, evaluated on the Choi output directly.
double phi_overlap(const CMatrix& rho, int d) {
  CVector phi = CVector::Zero(d * d);
  for (int z = 0; z < d; ++z) phi(z * d + z) = 1.0 / std::sqrt(double(d));
  return (phi.adjoint() * rho * phi)(0, 0).real();
}

}  // namespace

TEST_CASE("coherent measurement isometries") {
  Povm z{{{"B", 3}}, {}};
  for (int k = 0; k < 3; ++k) z.elements.push_back(basis_ket(3, k) * basis_ket(3, k).adjoint());
  const Isometry vz = coherent_isometry(z, "Ap");
  CHECK(max_abs_diff(permute_systems(vz, {"B"}, {"B", "Ap"}).matrix(), u_z(3, "B", "Ap").matrix()) <
        1e-15);

  Povm flat{{{"B", 2}}, std::vector<CMatrix>(4, CMatrix::Identity(2, 2) / 4.0)};
  const Isometry vf = coherent_isometry(flat, "R");
  for (int m = 0; m < 4; ++m) {
    CHECK(max_abs_diff(vf.matrix().block(2 * m, 0, 2, 2), CMatrix::Identity(2, 2) / 2.0) < 1e-15);
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledState psi = random_ab(3, 2, seed);
    const auto c = guess_prob(psi, "A", Basis::Z, {"B"});
    CHECK(isometry_defect(coherent_isometry(c.povm, "Ap")) < 1e-9);
  }
}

TEST_CASE("recovery circuit on the maximally entangled state") {
  for (int d = 2; d <= 5; ++d) {
    const LabeledState phi = max_entangled(d);
    const auto pz = guess_prob(phi, "A", Basis::Z, {"B"});
    const auto pxp = guess_prob(psi_z(phi), "A", Basis::X, {"Ap", "B"});
    const RecoveryCircuit c = build_recovery(phi, pz.povm, pxp.povm);
    CHECK(circuit_fidelity(phi, c) >= 1.0 - 1e-9);
    CHECK(max_recovery_fidelity(phi, "A", {"B"}).value.lower >= 1.0 - 1e-9);
  }
}

TEST_CASE("recovery chain on random states") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const int db = 2 + static_cast<int>(seed % 3);
    const LabeledState psi = random_ab(d, db, 500 + seed);
    const auto pz = guess_prob(psi, "A", Basis::Z, {"B"});
    const auto pxp = guess_prob(psi_z(psi), "A", Basis::X, {"Ap", "B"});
    const RecoveryCircuit circuit = build_recovery(psi, pz.povm, pxp.povm);
    CHECK(isometry_defect(circuit.v_z) < 1e-9);
    CHECK(isometry_defect(circuit.v_x) < 1e-9);
    CHECK(isometry_defect(circuit.phase) < 1e-12);
    CHECK(isometry_defect(circuit.composed) < 1e-9);

    const CircuitChain chain = circuit_chain(psi, circuit);
    // Triangle inequality in angle space and the sqrt(Lambda) >= Lambda bounds.
    CHECK(std::acos(std::min(1.0, chain.total)) <=
          std::acos(std::min(1.0, chain.z_step)) + std::acos(std::min(1.0, chain.x_step)) + 1e-9);
    CHECK(chain.z_step >= pz.p_primal - 1e-9);
    CHECK(chain.x_step >= pxp.p_primal - 1e-9);
    CHECK(chain.total >= std::cos(std::acos(pz.p_primal) + std::acos(pxp.p_primal)) - 1e-6);

    const RecoveryFidelity f = max_recovery_fidelity(psi, "A", {"B"});
    CHECK(f.value.converged);
    CHECK(f.value.upper >= chain.total - 1e-7);
  }
}

TEST_CASE("optimal recovery channel") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const LabeledState psi = random_ab(d, 3, 900 + seed);
    const RecoveryFidelity f = max_recovery_fidelity(psi, "A", {"B"});
    CHECK(f.value.converged);
    CHECK(f.value.lower <= f.value.upper);
    CHECK(f.value.width() <= 1e-7);
    // The channel is CPTP and reproduces the lower bound.
    CHECK(min_eigenvalue(f.channel.choi) > -1e-10);
    CHECK(f.channel.trace_preservation_residual < 1e-8);
    const LabeledState out = apply_channel(f.channel, psi, "A", {"B"});
    const CMatrix rho = permute_systems(out, {"A", "Ap"}).density_matrix();
    CHECK(std::sqrt(phi_overlap(rho, d)) == doctest::Approx(f.value.lower).epsilon(1e-9));
  }
}

TEST_CASE("separable states recover only 1/d") {
  for (int d = 2; d <= 4; ++d) {
    const LabeledState sep = tensor(maximally_mixed(d, "A"), random_density({{"B", 3}}, 2, d));
    const RecoveryFidelity f = max_recovery_fidelity(sep, "A", {"B"});
    CHECK(f.value.lower == doctest::Approx(1.0 / d).epsilon(1e-6));
    CHECK(f.value.upper == doctest::Approx(1.0 / d).epsilon(1e-6));
    // Any output is pi (x) tau, and <Phi|pi (x) tau|Phi> = 1/d^2.
    const LabeledState out = apply_channel(f.channel, sep, "A", {"B"});
    CHECK(phi_overlap(permute_systems(out, {"A", "Ap"}).density_matrix(), d) ==
          doctest::Approx(1.0 / (d * d)).epsilon(1e-9));
  }
}

TEST_CASE("Q fidelities") {
  for (int d = 2; d <= 4; ++d) {
    const LabeledState eig = tensor(basis_state({{"A", d}}, {1}), random_pure({{"E", 2}}, d));
    CHECK(q_fidelity(eig, "A", Basis::Z, {}) == doctest::Approx(1.0 / std::sqrt(double(d))));
    CHECK(q_fidelity(max_entangled(d), "A", Basis::Z, {"B"}) ==
          doctest::Approx(1.0 / std::sqrt(double(d))));
  }

  // Q(X|A'E)_{psi_Z} = F(psi^{A'E}, psi_Z^{A'E}).
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const LabeledState psi = purify(random_ab(d, 2, 70 + seed), "E");
    const LabeledState copied = psi_z(psi);
    const double q = q_fidelity(copied, "A", Basis::X, {"Ap", "E"});
    const LabeledState moved = LabeledState::pure(
        permute_systems(psi, {"A", "B", "E"}).vector(), {{"Ap", d}, {"B", 2}, {"E", psi.system("E").dim}});
    const double f = fidelity(partial_trace(moved, {"Ap", "E"}), partial_trace(copied, {"Ap", "E"}));
    // Both sides are rank deficient; square roots lift roundoff to ~1e-9.
    CHECK(std::abs(q - f) < 1e-8);
  }
}

TEST_CASE("max over sigma") {
  // Trivial environment: no optimization.
  const LabeledState t = theta_state(3, 0.4);
  const auto triv = max_sigma_fidelity(t, "A", Basis::Z, {});
  CHECK(triv.width() == 0.0);
  CHECK(triv.lower == doctest::Approx(q_fidelity(t, "A", Basis::Z, {})));

  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int d = 2 + static_cast<int>(seed % 2);
    const int de = 2 + static_cast<int>(seed % 4);
    const LabeledState psi = random_pure({{"A", d}, {"B", 2}, {"E", de}}, 1200 + seed);
    const auto s = max_sigma_fidelity(psi, "A", Basis::Z, {"E"});
    CHECK(s.converged);
    // The marginal is feasible.
    CHECK(s.lower >= q_fidelity(psi, "A", Basis::Z, {"E"}) - 1e-12);
    // Duality: max_sigma F^2 = F(A|A'B)^2 on psi_Z.
    const LabeledState copied = partial_trace(psi_z(psi), {"A", "Ap", "B"});
    const auto f = max_recovery_fidelity(copied, "A", {"Ap", "B"});
    CHECK(s.lower <= f.value.upper + 1e-9);
    CHECK(f.value.lower <= s.upper + 1e-9);
    // And it dominates X guessing from B.
    CHECK(s.upper * s.upper >= guess_prob(psi, "A", Basis::X, {"B"}).p_primal - 1e-7);
  }
}
