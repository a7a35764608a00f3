#include "qguess/qops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qguess {

namespace {

void require_dim(int d) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
}

int mod(int a, int d) { return ((a % d) + d) % d; }

}  // namespace

const char* to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

cplx omega(int d) {
  require_dim(d);
  return std::polar(1.0, 2.0 * std::numbers::pi / d);
}

CVector fourier_ket(int d, int x) {
  require_dim(d);
  CVector v(d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (int z = 0; z < d; ++z) {
    // Reduce the exponent first so phases are exact multiples of 2 pi / d.
    v(z) = s * std::polar(1.0, 2.0 * std::numbers::pi * mod(x * z, d) / d);
  }
  return v;
}

CMatrix basis_matrix(int d, Basis b) {
  require_dim(d);
  if (b == Basis::Z) return CMatrix::Identity(d, d);
  CMatrix m(d, d);
  for (int x = 0; x < d; ++x) m.col(x) = fourier_ket(d, x);
  return m;
}

ConjugatePair ConjugatePair::make(int d) {
  return {d, qguess::omega(d), basis_matrix(d, Basis::Z), basis_matrix(d, Basis::X)};
}

Operator pauli_x(int d, const std::string& label) {
  require_dim(d);
  CMatrix m = CMatrix::Zero(d, d);
  for (int z = 0; z < d; ++z) m(mod(z + 1, d), z) = 1.0;
  return Operator(m, {{label, d}}, {{label, d}});
}

Operator pauli_z_power(int d, int k, const std::string& label) {
  require_dim(d);
  CMatrix m = CMatrix::Zero(d, d);
  for (int z = 0; z < d; ++z) {
    m(z, z) = std::polar(1.0, 2.0 * std::numbers::pi * mod(k * z, d) / d);
  }
  return Operator(m, {{label, d}}, {{label, d}});
}

Operator pauli_z(int d, const std::string& label) { return pauli_z_power(d, 1, label); }

Isometry u_z(int d, const std::string& a, const std::string& copy) {
  require_dim(d);
  CMatrix m = CMatrix::Zero(d * d, d);
  for (int z = 0; z < d; ++z) m(z * d + z, z) = 1.0;
  return Operator(m, {{a, d}}, {{a, d}, {copy, d}});
}

Isometry u_x(int d, const std::string& a, const std::string& reg) {
  require_dim(d);
  CMatrix m = CMatrix::Zero(d * d, d);
  for (int x = 0; x < d; ++x) {
    const CVector k = fourier_ket(d, x);
    const CMatrix proj = k * k.adjoint();
    for (int i = 0; i < d; ++i) m.row(i * d + x) = proj.row(i);
  }
  return Operator(m, {{a, d}}, {{a, d}, {reg, d}});
}

Operator controlled_phase(int d, const std::string& control, const std::string& target) {
  require_dim(d);
  CMatrix m = CMatrix::Zero(d * d, d * d);
  for (int x = 0; x < d; ++x) {
    for (int z = 0; z < d; ++z) {
      m(x * d + z, x * d + z) = std::polar(1.0, 2.0 * std::numbers::pi * mod(x * z, d) / d);
    }
  }
  return Operator(m, {{control, d}, {target, d}}, {{control, d}, {target, d}});
}

Isometry w_operator(int d, const std::string& a, const std::string& ap, const std::string& app) {
  require_dim(d);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  CMatrix m = CMatrix::Zero(d * d * d, d);
  for (int x = 0; x < d; ++x) {
    const CVector k = fourier_ket(d, x);
    for (int i = 0; i < d; ++i) {
      for (int z = 0; z < d; ++z) m((x * d + i) * d + z, z) = s * k(i);
    }
  }
  return Operator(m, {{a, d}}, {{app, d}, {a, d}, {ap, d}});
}

LabeledState psi_z(const LabeledState& psi, const std::string& a, const std::string& copy) {
  return apply(u_z(psi.system(a).dim, a, copy), psi);
}

ThetaFamily ThetaFamily::make(int d, double theta) {
  require_dim(d);
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2)) {
    throw std::invalid_argument("theta must lie in [0, pi/2]");
  }
  return {d, theta, 1.0 + std::sin(2.0 * theta) / std::sqrt(static_cast<double>(d))};
}

CVector ThetaFamily::ket() const {
  CVector v = std::cos(theta) * basis_ket(d, 0) + std::sin(theta) * fourier_ket(d, 0);
  return v / std::sqrt(normalization);
}

LabeledState max_entangled(int d, const std::string& a, const std::string& b) {
  require_dim(d);
  CVector v = CVector::Zero(d * d);
  for (int z = 0; z < d; ++z) v(z * d + z) = 1.0 / std::sqrt(static_cast<double>(d));
  return LabeledState::pure(v, {{a, d}, {b, d}});
}

LabeledState theta_state(int d, double theta, const std::string& a) {
  const auto fam = ThetaFamily::make(d, theta);
  CVector v = fam.ket();
  v.normalize();
  return LabeledState::pure(v, {{a, d}});
}

LabeledState ghz(int d, const std::string& a, const std::string& b, const std::string& e) {
  require_dim(d);
  CVector v = CVector::Zero(d * d * d);
  for (int z = 0; z < d; ++z) v((z * d + z) * d + z) = 1.0 / std::sqrt(static_cast<double>(d));
  return LabeledState::pure(v, {{a, d}, {b, d}, {e, d}});
}

LabeledState maximally_mixed(int d, const std::string& label) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  return LabeledState::density(CMatrix::Identity(d, d) / d, {{label, d}});
}

}  // namespace qguess
