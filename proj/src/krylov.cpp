#include "kqr/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kqr {

namespace {

// Chain restricted to the first m sites of the sequence.
struct Chain {
  RVec a;
  RVec b;
};

Chain truncated_chain(const LanczosSequence& seq, double ls_fraction) {
  if (!(ls_fraction > 0.0 && ls_fraction <= 1.0)) {
    throw std::invalid_argument("ls_fraction must lie in (0, 1]");
  }
  const auto d = seq.dim();
  auto m = static_cast<Eigen::Index>(std::ceil(ls_fraction * static_cast<double>(d)));
  m = std::min(m, d);
  Chain c;
  c.a = seq.a.head(m);
  c.b = seq.b.head(std::min<Eigen::Index>(m > 0 ? m - 1 : 0, seq.b.size()));
  return c;
}

ComplexitySeries series_from_chain(const Chain& chain, double t_max, int n_times) {
  if (n_times < 2) throw std::invalid_argument("k_complexity_series: need n_times >= 2");
  if (!(t_max > 0.0)) throw std::invalid_argument("k_complexity_series: t_max must be positive");
  const Eigen::Index d = chain.a.size();
  RVec times(n_times);
  for (int i = 0; i < n_times; ++i) {
    times[i] = t_max * static_cast<double>(i) / static_cast<double>(n_times - 1);
  }
  Eigen::SelfAdjointEigenSolver<RMat> solver;
  solver.computeFromTridiagonal(chain.a, chain.b);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("k_complexity_series: tridiagonal eigensolver failed");
  }
  const RVec& w = solver.eigenvalues();
  const RMat& s = solver.eigenvectors();
  RVec weight0 = s.row(0);
  RVec positions(d);
  for (Eigen::Index k = 0; k < d; ++k) positions[k] = static_cast<double>(k);
  ComplexitySeries out;
  out.times = times;
  out.values.resize(n_times);
  CVec coeff(d);
  for (int ti = 0; ti < n_times; ++ti) {
    for (Eigen::Index m = 0; m < d; ++m) {
      coeff[m] = std::polar(weight0[m], -w[m] * times[ti]);
    }
    CVec amps = s.cast<Complex>() * coeff;
    double ck = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) ck += positions[k] * std::norm(amps[k]);
    out.values[ti] = ck;
  }
  const int half = n_times / 2;
  out.plateau_mean = out.values.tail(n_times - half).mean();
  out.plateau_begin = times[half];
  return out;
}

}  // namespace

double default_eps_b(const CMat& h) { return 1e-10 * h.cwiseAbs().maxCoeff(); }

LanczosSequence lanczos_state(const CMat& h, const CVec& psi0, double eps_b,
                              Eigen::Index max_dim, bool store_basis) {
  const Eigen::Index dim = h.rows();
  if (h.cols() != dim) throw std::invalid_argument("lanczos_state: h must be square");
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("lanczos_state: h is not Hermitian within tolerance");
  }
  if (psi0.size() != dim) throw std::invalid_argument("lanczos_state: psi0 dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("lanczos_state: psi0 must be normalized to 1e-12");
  }
  if (max_dim < 1 || max_dim > dim) {
    throw std::invalid_argument("lanczos_state: max_dim must lie in [1, dim]");
  }
  if (!(eps_b > 0.0)) throw std::invalid_argument("lanczos_state: eps_b must be positive");

  CMat basis(dim, max_dim);
  basis.col(0) = psi0;
  std::vector<double> a_coeffs, b_coeffs;
  a_coeffs.reserve(max_dim);
  CVec w(dim);
  for (Eigen::Index k = 0; k < max_dim; ++k) {
    const auto vk = basis.col(k);
    w.noalias() = h * vk;
    double ak = std::real(vk.dot(w));
    a_coeffs.push_back(ak);
    w -= ak * vk;
    if (k > 0) w -= b_coeffs.back() * basis.col(k - 1);
    // Full reorthogonalization, two passes: classical Gram-Schmidt against
    // every stored vector, repeated once to purge the residual leakage.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j <= k; ++j) {
        w -= basis.col(j).dot(w) * basis.col(j);
      }
    }
    double bk = w.norm();
    if (k + 1 >= max_dim || bk < eps_b) break;
    b_coeffs.push_back(bk);
    basis.col(k + 1) = w / bk;
  }
  LanczosSequence seq;
  const auto d = static_cast<Eigen::Index>(a_coeffs.size());
  seq.a.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) seq.a[i] = a_coeffs[static_cast<std::size_t>(i)];
  seq.b.resize(static_cast<Eigen::Index>(b_coeffs.size()));
  for (std::size_t i = 0; i < b_coeffs.size(); ++i) seq.b[static_cast<Eigen::Index>(i)] = b_coeffs[i];
  if (store_basis) seq.basis = basis.leftCols(d);
  return seq;
}

LanczosSequence lanczos_state(const CMat& h, const CVec& psi0) {
  return lanczos_state(h, psi0, default_eps_b(h), h.rows());
}

CMat evolve_krylov(const LanczosSequence& seq, const RVec& times) {
  Chain chain{seq.a, seq.b};
  const Eigen::Index d = chain.a.size();
  if (d == 0) throw std::invalid_argument("evolve_krylov: empty sequence");
  Eigen::SelfAdjointEigenSolver<RMat> solver;
  solver.computeFromTridiagonal(chain.a, chain.b);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("evolve_krylov: tridiagonal eigensolver failed");
  }
  const RVec& w = solver.eigenvalues();
  const CMat s = solver.eigenvectors().cast<Complex>();
  RVec weight0 = solver.eigenvectors().row(0);
  CMat out(times.size(), d);
  CVec coeff(d);
  for (Eigen::Index ti = 0; ti < times.size(); ++ti) {
    if (!std::isfinite(times[ti])) throw std::invalid_argument("evolve_krylov: non-finite time");
    for (Eigen::Index m = 0; m < d; ++m) {
      coeff[m] = std::polar(weight0[m], -w[m] * times[ti]);
    }
    out.row(ti) = (s * coeff).transpose();
  }
  return out;
}

ComplexitySeries k_complexity_series(const LanczosSequence& seq, double t_max, int n_times) {
  return series_from_chain(Chain{seq.a, seq.b}, t_max, n_times);
}

ComplexitySeries k_complexity_series(const LanczosSequence& seq, int n_times) {
  return series_from_chain(Chain{seq.a, seq.b}, default_t_max(seq), n_times);
}

double default_t_max(const LanczosSequence& seq) {
  if (seq.b.size() == 0) return 1.0;
  double mean_b = seq.b.mean();
  if (!(mean_b > 0.0)) return 1.0;
  return 5.0 * static_cast<double>(seq.dim()) / mean_b;
}

double scrambling_time(const ComplexitySeries& series) {
  if (!(series.plateau_mean > 0.0)) {
    // A flat series (e.g. from a stationary state) never scrambles.
    throw NotReachedError("scrambling_time: plateau mean is zero, state never spreads", 0.0);
  }
  const double half = 0.5 * series.plateau_mean;
  for (Eigen::Index i = 0; i < series.values.size(); ++i) {
    if (series.values[i] >= half) {
      if (i == 0) return series.times[0];
      double c0 = series.values[i - 1], c1 = series.values[i];
      double t0 = series.times[i - 1], t1 = series.times[i];
      return t0 + (half - c0) * (t1 - t0) / (c1 - c0);
    }
  }
  throw NotReachedError("scrambling_time: series never reaches half plateau, max attained " +
                            std::to_string(series.values.maxCoeff()),
                        series.values.maxCoeff());
}

LanczosVariances lanczos_variances(const LanczosSequence& seq, double ls_fraction) {
  Chain c = truncated_chain(seq, ls_fraction);
  if (c.a.size() < 2 || c.b.size() < 2) {
    throw std::invalid_argument("lanczos_variances: fraction keeps fewer than 2 coefficients");
  }
  auto sample_var = [](const RVec& v) {
    double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
  };
  return {sample_var(c.a), sample_var(c.b)};
}

ComplexitySeries k_complexity_truncated(const LanczosSequence& seq, double ls_fraction,
                                        double t_max, int n_times) {
  return series_from_chain(truncated_chain(seq, ls_fraction), t_max, n_times);
}

ComplexitySeries k_complexity_truncated(const LanczosSequence& seq, double ls_fraction,
                                        int n_times) {
  Chain c = truncated_chain(seq, ls_fraction);
  LanczosSequence tmp;
  tmp.a = c.a;
  tmp.b = c.b;
  return series_from_chain(c, default_t_max(tmp), n_times);
}

}  // namespace kqr
