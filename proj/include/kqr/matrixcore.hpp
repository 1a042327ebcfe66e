#pragma once

#include "kqr/types.hpp"

namespace kqr {

// Hermitian eigensystem, values ascending, vectors orthonormal columns.
struct EigenDecomposition {
  RVec values;
  CMat vectors;
};

// Unitary eigensystem: u = vectors * diag(exp(i*phases)) * vectors^dagger,
// phases ascending in (-pi, pi]. Numerically coincident phases are snapped
// to a single shared value so that exact degeneracies stay exact downstream.
struct UnitaryEigensystem {
  RVec phases;
  CMat vectors;
};

CMat kron(const CMat& a, const CMat& b);

// Requires h Hermitian to 1e-9 (max-abs); the Hermitian part is diagonalized.
EigenDecomposition eig_hermitian(const CMat& h);

// Requires ||u u^dagger - I||_max <= 1e-9. Phase convention is the principal
// branch (-pi, pi], with -1 mapping to +pi. `cluster_tol` is the phase
// distance under which eigenvalues are treated as one degenerate level.
UnitaryEigensystem eigphases_unitary(const CMat& u, double cluster_tol = 1e-8);

// Effective Hermitian generator: u = exp(+i H t / hbar) with eigenvalues
// (hbar/t) * theta, theta the principal eigenphases. time and hbar positive.
CMat log_unitary(const CMat& u, double time, double hbar);

// exp(sign * i * h * time / hbar) for Hermitian h; sign must be +1 or -1.
CMat exp_hermitian_to_unitary(const CMat& h, double time, double hbar, int sign);

}  // namespace kqr
