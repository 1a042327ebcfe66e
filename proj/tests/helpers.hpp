#pragma once

#include <Eigen/QR>
#include <cmath>

#include "kqr/rng.hpp"
#include "kqr/types.hpp"

namespace kqr::testing {

inline double max_abs_diff(const CMat& a, const CMat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline CMat random_complex_gaussian(SplitMix64& rng, int n) {
  CMat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal_complex();
  return g;
}

inline CMat random_hermitian(SplitMix64& rng, int n) {
  CMat g = random_complex_gaussian(rng, n);
  return 0.5 * (g + g.adjoint());
}

// Haar-distributed unitary: QR of a complex Gaussian with the R diagonal
// phase-fixed to be positive.
inline CMat random_unitary(SplitMix64& rng, int n) {
  CMat g = random_complex_gaussian(rng, n);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
  }
  return q;
}

// Unitary with prescribed eigenphases (Haar eigenbasis).
inline CMat unitary_with_phases(SplitMix64& rng, const RVec& phases) {
  int n = static_cast<int>(phases.size());
  CMat v = random_unitary(rng, n);
  CVec d(n);
  for (int i = 0; i < n; ++i) d[i] = std::polar(1.0, phases[i]);
  return v * d.asDiagonal() * v.adjoint();
}

// Levels with i.i.d. exponential spacings (Poisson point process).
inline RVec poisson_levels(SplitMix64& rng, int count) {
  RVec levels(count);
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    acc += -std::log1p(-rng.uniform());
    levels[i] = acc;
  }
  return levels;
}

// Real-symmetric Gaussian matrix (A + A^T)/2 with i.i.d. standard normals.
inline RMat gaussian_symmetric(SplitMix64& rng, int n) {
  RMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return 0.5 * (a + a.transpose());
}

}  // namespace kqr::testing
