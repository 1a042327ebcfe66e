#pragma once

#include "kqr/types.hpp"

namespace kqr {

// Compute-once bundle of the spectral chaos indicators.
struct SpectralSummary {
  RVec levels;          // sorted input levels
  double mean_spacing;  // central-80% trimmed mean spacing
  double r_bar;
  double t_heisenberg;
};

// Mean consecutive-spacing ratio <min(s_i, s_{i+1}) / max(s_i, s_{i+1})> of a
// line spectrum. Spacings below 1e-12 * (spectral range) are collapsed
// (treated as one level) before forming ratios, so symmetry-cleaned spectra
// do not produce spurious zero ratios from numerical ties. Requires at least
// 3 distinct levels after collapsing.
double r_statistic(const RVec& levels);

// Circular variant for eigenphases on (-pi, pi]: the wrap-around spacing
// 2*pi - span closes the spacing sequence on the circle. Unlike the line
// statistic, spacings below `degeneracy_tol` are kept and counted as exact
// zeros (a degenerate quasi-energy pair contributes a zero ratio; the ratio
// of two zero spacings is defined as zero). Exactly degenerate eigenphases
// are physical for circuit unitaries, and removing them would misrepresent
// strongly commensurate spectra as rigid ones.
double r_statistic_phases(const RVec& phases, double degeneracy_tol = 1e-10);

// t_H = 2*pi*hbar / <spacing>, the mean spacing taken over the central 80%
// of the sorted spectrum (the edges distort the mean density).
double heisenberg_time(const RVec& levels, double hbar);

SpectralSummary spectral_summary(const RVec& levels, double hbar);

}  // namespace kqr
