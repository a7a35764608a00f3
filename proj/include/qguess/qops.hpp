#pragma once

// Fixed operators and state families for a d-dimensional system measured in
// the computational (Z) or Fourier (X) basis.

#include <string>

#include "qguess/linalg.hpp"

namespace qguess {

namespace labels {
inline const std::string A = "A";
inline const std::string Ap = "Ap";    // copy of A's Z value
inline const std::string App = "App";  // register for A's X value
inline const std::string B = "B";
inline const std::string E = "E";
}  // namespace labels

enum class Basis { Z, X };

const char* to_string(Basis b);

// exp(2 pi i / d).
cplx omega(int d);

/// Computational basis |z> and Fourier basis |x~> = d^{-1/2} sum_z w^{xz} |z>.
struct ConjugatePair {
  int d;
  cplx omega;
  CMatrix z_basis;  // columns |z>
  CMatrix x_basis;  // columns |x~>

  static ConjugatePair make(int d);
  const CMatrix& basis(Basis b) const { return b == Basis::Z ? z_basis : x_basis; }
};

CVector fourier_ket(int d, int x);
// Columns are the kets of the requested basis.
CMatrix basis_matrix(int d, Basis b);

// X|z> = |z+1 mod d>, Z|z> = w^z |z>.
Operator pauli_x(int d, const std::string& label = labels::A);
Operator pauli_z(int d, const std::string& label = labels::A);
// Z^k for any integer k (negative powers allowed).
Operator pauli_z_power(int d, int k, const std::string& label = labels::A);

// sum_z |z><z|^A (x) |z>^{copy}: A -> (A, copy).
Isometry u_z(int d, const std::string& a = labels::A, const std::string& copy = labels::Ap);
// sum_x |x~><x~|^A (x) |x>^{reg}: A -> (A, reg).
Isometry u_x(int d, const std::string& a = labels::A, const std::string& reg = labels::App);
// sum_x |x><x|^{control} (x) (Z^x)^{target}, on (control, target).
Operator controlled_phase(int d, const std::string& control = labels::App,
                          const std::string& target = labels::Ap);
// Closed form d^{-1/2} sum_x |x>^{App} |x~>^A (x) 1^{Ap|A}: A -> (App, A, Ap).
Isometry w_operator(int d, const std::string& a = labels::A, const std::string& ap = labels::Ap,
                    const std::string& app = labels::App);

// U_Z applied to `psi` on system `a`; result ordered (a, copy, rest...).
LabeledState psi_z(const LabeledState& psi, const std::string& a = labels::A,
                   const std::string& copy = labels::Ap);

/// (cos t |0> + sin t |0~>) / sqrt(N), N = 1 + sin(2t)/sqrt(d).
struct ThetaFamily {
  int d;
  double theta;
  double normalization;

  static ThetaFamily make(int d, double theta);
  CVector ket() const;
};

LabeledState max_entangled(int d, const std::string& a = labels::A,
                           const std::string& b = labels::B);
LabeledState theta_state(int d, double theta, const std::string& a = labels::A);
LabeledState ghz(int d, const std::string& a = labels::A, const std::string& b = labels::B,
                 const std::string& e = labels::E);
// Maximally mixed state on one system.
LabeledState maximally_mixed(int d, const std::string& label);

}  // namespace qguess
