#include <cmath>
#include <random>

#include "qguess/linalg.hpp"
#include "qguess/qops.hpp"
#include "support.hpp"

using namespace qguess;
using qtest::kron;
using qtest::max_abs_diff;

namespace {

CMatrix pauli2(char which) {
  CMatrix m = CMatrix::Zero(2, 2);
  if (which == 'x') m << 0, 1, 1, 0;
  if (which == 'z') m << 1, 0, 0, -1;
  return m;
}

LabeledState qubit(const std::string& label, double c0, double c1) {
  CVector v(2);
  v << c0, c1;
  return LabeledState::pure(v.normalized(), {{label, 2}});
}

}  // namespace

TEST_CASE("tensor of operators and states") {
  const Operator id = tensor(Operator::identity({{"A", 2}}), Operator::identity({{"B", 2}}));
  CHECK(max_abs_diff(id.matrix(), CMatrix::Identity(4, 4)) == 0.0);

  const LabeledState zz = tensor(basis_state({{"A", 2}}, {0}), basis_state({{"B", 2}}, {0}));
  CHECK(zz.vector().norm() == doctest::Approx(1.0));
  CHECK(std::abs(zz.vector()(0) - cplx(1.0)) < 1e-15);

  // Z (x) X expanded by hand.
  CMatrix hand(4, 4);
  hand << 0, 1, 0, 0,
          1, 0, 0, 0,
          0, 0, 0, -1,
          0, 0, -1, 0;
  const Operator zx = tensor(pauli_z(2, "A"), pauli_x(2, "B"));
  CHECK(max_abs_diff(zx.matrix(), hand) < 1e-15);
}

TEST_CASE("partial trace") {
  const LabeledState phi = max_entangled(3);
  const CMatrix red = partial_trace(phi, {"A"}).density_matrix();
  CHECK(max_abs_diff(red, CMatrix::Identity(3, 3) / 3.0) < 1e-14);

  const LabeledState rho = random_density({{"A", 2}}, 2, 11);
  const LabeledState sigma = random_density({{"B", 3}}, 2, 12);
  const LabeledState prod = tensor(rho, sigma);
  CHECK(max_abs_diff(partial_trace(prod, {"B"}).density_matrix(), sigma.density_matrix()) < 1e-14);
  CHECK(max_abs_diff(partial_trace(prod, {"A"}).density_matrix(), rho.density_matrix()) < 1e-14);

  // The result follows the order of `keep`.
  const LabeledState swapped = partial_trace(prod, {"B", "A"});
  CHECK(swapped.systems()[0].name == "B");
  CHECK(max_abs_diff(swapped.density_matrix(),
                     kron(sigma.density_matrix(), rho.density_matrix())) < 1e-14);

  // Pure and density routes agree.
  const LabeledState psi = random_pure({{"A", 2}, {"B", 3}, {"C", 2}}, 5);
  const LabeledState as_density = LabeledState::density(psi.density_matrix(), psi.systems());
  CHECK(max_abs_diff(partial_trace(psi, {"C", "A"}).density_matrix(),
                     partial_trace(as_density, {"C", "A"}).density_matrix()) < 1e-13);
}

TEST_CASE("copy state marginal matches the shifted expansion") {
  // tr_A of psi_Z computed from (1/sqrt d) sum_x |x~>^A (Z^{-x})^{A'} |psi>^{A'B}.
  for (int d : {2, 3}) {
    const LabeledState psi = random_pure({{"A", d}, {"B", 2}}, 40 + d);
    const CMatrix rho = psi.density_matrix();
    const int db = 2;
    CMatrix expected = CMatrix::Zero(d * db, d * db);
    for (int x = 0; x < d; ++x) {
      CMatrix zpow = CMatrix::Zero(d, d);
      for (int z = 0; z < d; ++z) zpow(z, z) = std::polar(1.0, -2.0 * M_PI * x * z / d);
      const CMatrix shift = kron(zpow, CMatrix::Identity(db, db));
      expected += shift * rho * shift.adjoint() / static_cast<double>(d);
    }
    const LabeledState copied = psi_z(psi);
    const CMatrix got = partial_trace(copied, {"Ap", "B"}).density_matrix();
    CHECK(max_abs_diff(got, expected) < 1e-13);
  }
}

TEST_CASE("permute systems") {
  const LabeledState s01 = tensor(basis_state({{"A", 2}}, {0}), basis_state({{"B", 2}}, {1}));
  const LabeledState s10 = permute_systems(s01, {"B", "A"});
  CHECK(std::abs(s10.vector()(2) - cplx(1.0)) < 1e-15);
  const LabeledState back = permute_systems(s10, {"A", "B"});
  CHECK((back.vector() - s01.vector()).norm() < 1e-15);

  const LabeledState phi = max_entangled(4);
  CHECK((permute_systems(phi, {"B", "A"}).vector() - phi.vector()).norm() < 1e-15);
}

TEST_CASE("apply acts on the named subsystem only") {
  const LabeledState psi = random_pure({{"A", 2}, {"B", 3}}, 8);
  const LabeledState out = apply(pauli_x(3, "B"), psi);
  CHECK(out.systems()[0].name == "B");
  const CVector expected = kron(CMatrix::Identity(2, 2), pauli_x(3, "B").matrix()) * psi.vector();
  CHECK((permute_systems(out, {"A", "B"}).vector() - expected).norm() < 1e-14);

  const LabeledState mixed = random_density({{"A", 2}, {"B", 3}}, 3, 9);
  const CMatrix k = kron(pauli2('z'), CMatrix::Identity(3, 3));
  const LabeledState mixed_out = apply(pauli_z(2, "A"), mixed);
  CHECK(max_abs_diff(mixed_out.density_matrix(), k * mixed.density_matrix() * k.adjoint()) < 1e-14);
}

TEST_CASE("herm_eig") {
  const auto z = herm_eig(pauli2('z'));
  CHECK(z.values(0) == doctest::Approx(-1.0));
  CHECK(z.values(1) == doctest::Approx(1.0));
  CHECK((herm_eig(CMatrix::Identity(5, 5)).values.array() - 1.0).abs().maxCoeff() < 1e-15);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CMatrix h = qtest::random_hermitian(6, seed);
    CHECK(std::abs(herm_eig(h).values.sum() - h.trace().real()) < 1e-10);
  }
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(herm_eig(bad), std::invalid_argument);
}

TEST_CASE("psd_sqrt") {
  const CMatrix proj = CVector::Ones(3) * CVector::Ones(3).adjoint() / 3.0;
  // Zero eigenvalues carry roundoff, which the square root lifts to ~sqrt(eps).
  CHECK(max_abs_diff(psd_sqrt(proj), proj) < 1e-7);
  CHECK(max_abs_diff(psd_sqrt(proj) * psd_sqrt(proj), proj) < 1e-9);
  CMatrix d49 = CMatrix::Zero(2, 2);
  d49(0, 0) = 4;
  d49(1, 1) = 9;
  const CMatrix r = psd_sqrt(d49);
  CHECK(std::abs(r(0, 0) - cplx(2)) < 1e-14);
  CHECK(std::abs(r(1, 1) - cplx(3)) < 1e-14);

  // sqrt(P) >= P for 0 <= P <= I.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CMatrix p = qtest::random_effect(4, seed);
    CHECK(min_eigenvalue(psd_sqrt(p) - p) > -1e-12);
  }
  CHECK_THROWS_AS(psd_sqrt(CMatrix(-CMatrix::Identity(2, 2))), std::domain_error);
}

TEST_CASE("fidelity and trace distance") {
  const LabeledState zero = qubit("A", 1, 0);
  const LabeledState one = qubit("A", 0, 1);
  const LabeledState plus = qubit("A", 1, 1);
  CHECK(fidelity(zero, zero) == doctest::Approx(1.0));
  CHECK(fidelity(zero, one) == doctest::Approx(0.0));
  CHECK(fidelity(zero, plus) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(trace_distance(zero, zero) == doctest::Approx(0.0));
  CHECK(trace_distance(zero, one) == doctest::Approx(1.0));
  const double delta = trace_distance(zero, plus);
  const double f = fidelity(zero, plus);
  CHECK(delta == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(delta * delta + f * f == doctest::Approx(1.0));

  // Matrix route agrees with the pure fast path.
  const LabeledState a = random_pure({{"A", 3}}, 1);
  const LabeledState b = random_pure({{"A", 3}}, 2);
  CHECK(fidelity(a.density_matrix(), b.density_matrix()) ==
        doctest::Approx(std::abs(a.vector().dot(b.vector()))).epsilon(1e-10));
}

TEST_CASE("fidelity properties on random states") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Systems s{{"A", 2}, {"B", 2}};
    const LabeledState rho = random_density(s, 1 + static_cast<int>(seed % 4), 100 + seed);
    const LabeledState sigma = random_density(s, 1 + static_cast<int>((seed + 1) % 4), 200 + seed);
    const double f = fidelity(rho, sigma);
    const double delta = trace_distance(rho, sigma);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    // 1 - F <= delta <= sqrt(1 - F^2)
    CHECK(delta * delta + f * f <= 1.0 + 1e-10);
    CHECK(1.0 - f <= delta + 1e-10);
    // Data processing under partial trace.
    CHECK(fidelity(partial_trace(rho, {"A"}), partial_trace(sigma, {"A"})) >= f - 1e-10);
    CHECK(fidelity(rho, sigma) == doctest::Approx(fidelity(sigma, rho)).epsilon(1e-9));
  }
}

TEST_CASE("purify") {
  const LabeledState psi = random_pure({{"A", 2}}, 3);
  const LabeledState p = purify(psi, "E");
  CHECK(p.is_pure());
  CHECK(std::abs(inner_product(p, tensor(psi, basis_state({{"E", 2}}, {0})))) ==
        doctest::Approx(1.0));

  const LabeledState mixed = LabeledState::density(CMatrix::Identity(2, 2) / 2.0, {{"A", 2}});
  const LabeledState bell = purify(mixed, "E");
  CHECK(fidelity(partial_trace(bell, {"E"}), maximally_mixed(2, "E")) == doctest::Approx(1.0));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledState rho = random_density({{"A", 3}, {"B", 2}}, 3, seed);
    const LabeledState full = purify(rho, "E");
    CHECK(max_abs_diff(partial_trace(full, {"A", "B"}).density_matrix(), rho.density_matrix()) <
          1e-9);
  }
}

TEST_CASE("random states") {
  const Systems s{{"A", 3}, {"B", 2}};
  const LabeledState a = random_pure(s, 77);
  CHECK(std::abs(a.vector().norm() - 1.0) < 1e-12);
  CHECK((random_pure(s, 77).vector() - a.vector()).norm() == 0.0);
  CHECK((random_pure(s, 78).vector() - a.vector()).norm() > 1e-3);

  // Hilbert-Schmidt moment: E tr rho^2 = 2d/(d^2 + 1) for rank d on dimension d.
  for (int d : {2, 3}) {
    const int samples = 10000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
      const CMatrix rho = random_density({{"A", d}}, d, 1000 * d + i).density_matrix();
      const double purity = (rho * rho).trace().real();
      sum += purity;
      sum_sq += purity * purity;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sum_sq / samples - mean * mean) / samples);
    CHECK(std::abs(mean - 2.0 * d / (d * d + 1.0)) < 3 * se);
  }
}

TEST_CASE("validation rejects bad input") {
  CVector v = CVector::Ones(2);
  CHECK_THROWS_AS(LabeledState::pure(v, {{"A", 2}}), std::invalid_argument);
  CMatrix nonherm = CMatrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(LabeledState::density(nonherm, {{"A", 2}}), std::invalid_argument);
  CHECK_THROWS_AS(LabeledState::pure(CVector::Ones(4) / 2.0, {{"A", 2}, {"A", 2}}),
                  std::invalid_argument);
  CHECK_THROWS(partial_trace(max_entangled(2), {"Q"}));
}
