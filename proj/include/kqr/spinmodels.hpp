#pragma once

#include <vector>

#include "kqr/types.hpp"

namespace kqr {

// Longitudinal-transverse Ising chain parameters. Site k acts on bit
// (n-1-k): site 0 is the leftmost tensor factor / most significant bit.
struct IsingParams {
  int n = 2;
  double hx = 1.0;
  double hz = 0.0;
  double j_coupling = 1.0;
};

// Quantized standard map on the torus. Effective hbar = 1/(2*pi*n_hilbert).
// The Bloch phases shift the position/momentum grids; the defaults break the
// map's parity so spectral statistics are not contaminated by an unresolved
// symmetry sector.
struct StandardMapParams {
  int n_hilbert = 2;
  double k_chaos = 0.0;
  double bloch_x = 0.0;
  double bloch_p = 0.25;
};

// Isometry onto the +1 eigenspace of the site-reversal permutation.
struct ParityBasis {
  int n = 0;
  CMat basis;  // 2^n rows, d_plus columns, orthonormal
  Eigen::Index dim() const { return basis.cols(); }
};

// Spectral-window selection for eigenstate banks: the window is the
// fractional index range [lo_frac, hi_frac) of the sorted spectrum; if
// max_count > 0 the window is sub-sampled by a deterministic index stride
// down to that many states.
struct BankSelection {
  double lo_frac = 0.4;
  double hi_frac = 0.6;
  int max_count = -1;
};

CMat build_ising(const IsingParams& p);

ParityBasis parity_basis(int n);

// B^dagger M B; requires [M, R] = 0 to 1e-9 (max-abs), where R is the
// site-reversal permutation.
CMat project_operator(const CMat& m, const ParityBasis& basis);

CMat build_standard_map(const StandardMapParams& p);

// Eigenvectors of a Hermitian or unitary matrix selected by spectral window
// (energies sorted ascending; eigenphases sorted ascending on (-pi, pi]).
std::vector<CVec> eigenstate_bank(const CMat& h_or_u, const BankSelection& sel);

}  // namespace kqr
