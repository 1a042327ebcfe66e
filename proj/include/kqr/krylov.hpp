#pragma once

#include <stdexcept>

#include "kqr/types.hpp"

namespace kqr {

// Tridiagonal representation of H restricted to the Krylov space of a state:
// a are the D onsite coefficients, b the D-1 positive hopping coefficients.
struct LanczosSequence {
  RVec a;
  RVec b;
  CMat basis;  // dim x D orthonormal Krylov vectors (empty if not stored)
  Eigen::Index dim() const { return a.size(); }
};

// C_K(t) on a uniform time grid plus its plateau estimate (mean over the
// final half of the grid).
struct ComplexitySeries {
  RVec times;
  RVec values;
  double plateau_mean = 0.0;
  double plateau_begin = 0.0;  // plateau window is [plateau_begin, times.back()]
};

// Thrown when a complexity series never reaches half its plateau mean.
class NotReachedError : public std::runtime_error {
 public:
  NotReachedError(const std::string& msg, double attained)
      : std::runtime_error(msg), attained_max(attained) {}
  double attained_max;
};

// Three-term Lanczos recurrence with full reorthogonalization at every step.
// Terminates when the next hopping coefficient drops below eps_b or when
// max_dim vectors have been produced. h must be Hermitian to 1e-10 relative,
// psi0 normalized to 1e-12.
LanczosSequence lanczos_state(const CMat& h, const CVec& psi0, double eps_b,
                              Eigen::Index max_dim, bool store_basis = true);

// Defaults: eps_b = 1e-10 * ||h||_max, max_dim = dim(h).
LanczosSequence lanczos_state(const CMat& h, const CVec& psi0);

double default_eps_b(const CMat& h);

// Amplitudes psi_k(t) of the chain evolution i d/dt psi = T_chain psi with
// psi_k(0) = delta_k0, computed by exact eigendecomposition of the
// tridiagonal matrix (no time stepping). Rows index times, columns index k.
CMat evolve_krylov(const LanczosSequence& seq, const RVec& times);

// C_K(t) = sum_k k |psi_k(t)|^2 on n_times points spanning [0, t_max].
ComplexitySeries k_complexity_series(const LanczosSequence& seq, double t_max, int n_times);

// Default horizon t_max = 5 * D / <b> (saturation heuristic).
ComplexitySeries k_complexity_series(const LanczosSequence& seq, int n_times = 401);

double default_t_max(const LanczosSequence& seq);

// First time C_K crosses half the plateau mean, linearly interpolated
// between bracketing grid points. Throws NotReachedError if no crossing.
double scrambling_time(const ComplexitySeries& series);

struct LanczosVariances {
  double var_a = 0.0;
  double var_b = 0.0;
};

// Sample variances (denominator N-1) of the leading ceil(ls_fraction * D)
// entries of a and b. The retained count must be at least 2.
LanczosVariances lanczos_variances(const LanczosSequence& seq, double ls_fraction);

// Same as k_complexity_series but the chain is cut hard after the leading
// ceil(ls_fraction * D) coefficients.
ComplexitySeries k_complexity_truncated(const LanczosSequence& seq, double ls_fraction,
                                        double t_max, int n_times);
ComplexitySeries k_complexity_truncated(const LanczosSequence& seq, double ls_fraction,
                                        int n_times = 401);

}  // namespace kqr
