#pragma once

#include <random>

#include <doctest.h>

#include "qguess/linalg.hpp"

namespace qtest {

inline double max_abs_diff(const qguess::CMatrix& a, const qguess::CMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

// Plain Kronecker product, written out so tests do not lean on the library.
inline qguess::CMatrix kron(const qguess::CMatrix& a, const qguess::CMatrix& b) {
  qguess::CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline qguess::CMatrix random_hermitian(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  qguess::CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return (m + m.adjoint()) / 2.0;
}

// Random 0 <= P <= I.
inline qguess::CMatrix random_effect(Eigen::Index n, std::uint64_t seed) {
  Eigen::SelfAdjointEigenSolver<qguess::CMatrix> es(random_hermitian(n, seed));
  std::mt19937_64 rng(seed ^ 0x5bd1e995);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  qguess::RVector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
  return es.eigenvectors() * w.cast<qguess::cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qtest
