#include "kqr/matrixcore.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace kqr {

namespace {

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

void require_square(const CMat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty");
  }
}

void require_unitary(const CMat& u, const char* who) {
  require_square(u, who);
  const auto n = u.rows();
  double err = max_abs(u * u.adjoint() - CMat::Identity(n, n));
  if (err > 1e-9) {
    throw std::invalid_argument(std::string(who) + ": input not unitary, ||UU^+ - I||_max = " +
                                std::to_string(err));
  }
}

}  // namespace

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

EigenDecomposition eig_hermitian(const CMat& h) {
  require_square(h, "eig_hermitian");
  if (max_abs(h - h.adjoint()) > 1e-9 * std::max(1.0, max_abs(h))) {
    throw std::invalid_argument("eig_hermitian: input not Hermitian within tolerance");
  }
  CMat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

UnitaryEigensystem eigphases_unitary(const CMat& u, double cluster_tol) {
  require_unitary(u, "eigphases_unitary");
  const Eigen::Index n = u.rows();

  // Schur of a normal matrix: T is diagonal up to roundoff and Q is unitary,
  // so the columns of Q are an orthonormal eigenbasis even through repeated
  // eigenvalues (where generic eigensolvers return ill-conditioned vectors).
  Eigen::ComplexSchur<CMat> schur(u, /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    throw std::runtime_error("eigphases_unitary: Schur decomposition failed");
  }
  std::vector<double> phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases[i] = std::arg(schur.matrixT()(i, i));
    // std::arg can return exactly -pi for negative reals with a -0 imaginary
    // part; the convention here is half-open (-pi, pi].
    if (phases[i] <= -kPi) phases[i] = kPi;
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return phases[a] < phases[b]; });

  RVec sorted_phases(n);
  CMat vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted_phases[i] = phases[order[i]];
    vectors.col(i) = schur.matrixU().col(order[i]);
  }

  // Group numerically coincident phases and snap each group to its mean, so
  // degenerate levels come out exactly equal. A group can straddle the branch
  // point (phases near -pi and +pi are the same eigenvalue); that wrap group
  // is snapped onto +pi's side, honoring the half-open (-pi, pi] convention.
  std::vector<Eigen::Index> group_start;
  group_start.push_back(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    if (sorted_phases[i] - sorted_phases[i - 1] > cluster_tol) group_start.push_back(i);
  }
  auto group_end = [&](std::size_t g) {
    return g + 1 < group_start.size() ? group_start[g + 1] : n;
  };
  bool wraps = group_start.size() >= 2 &&
               (sorted_phases[n - 1] - sorted_phases[0]) > kTwoPi - cluster_tol;
  for (std::size_t g = 0; g < group_start.size(); ++g) {
    bool is_first = (g == 0);
    bool is_last = (g + 1 == group_start.size());
    if (wraps && (is_first || is_last)) continue;  // handled below as one group
    Eigen::Index lo = group_start[g], hi = group_end(g);
    double mean = sorted_phases.segment(lo, hi - lo).mean();
    sorted_phases.segment(lo, hi - lo).setConstant(mean);
  }
  if (wraps) {
    Eigen::Index first_hi = group_end(0);
    Eigen::Index last_lo = group_start.back();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < first_hi; ++i) sum += sorted_phases[i] + kTwoPi;
    for (Eigen::Index i = last_lo; i < n; ++i) sum += sorted_phases[i];
    double mean = sum / static_cast<double>(first_hi + (n - last_lo));
    if (mean > kPi) mean -= kTwoPi;
    // Members near -pi move to the +pi side of the branch.
    double snapped = (std::abs(std::abs(mean) - kPi) <= cluster_tol) ? kPi : mean;
    sorted_phases.head(first_hi).setConstant(snapped);
    sorted_phases.tail(n - last_lo).setConstant(snapped);
    // Re-sort so the relocated wrap members sit at their phase's position.
    std::vector<Eigen::Index> reorder(n);
    std::iota(reorder.begin(), reorder.end(), Eigen::Index{0});
    std::stable_sort(reorder.begin(), reorder.end(), [&](Eigen::Index a, Eigen::Index b) {
      return sorted_phases[a] < sorted_phases[b];
    });
    RVec ph2(n);
    CMat v2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ph2[i] = sorted_phases[reorder[i]];
      v2.col(i) = vectors.col(reorder[i]);
    }
    sorted_phases.swap(ph2);
    vectors.swap(v2);
  }

  CVec eigvals(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigvals[i] = std::polar(1.0, sorted_phases[i]);
  }
  double recon = max_abs(vectors * eigvals.asDiagonal() * vectors.adjoint() - u);
  if (recon > 1e-8) {
    throw std::runtime_error("eigphases_unitary: reconstruction residual " +
                             std::to_string(recon));
  }
  return {sorted_phases, vectors};
}

CMat log_unitary(const CMat& u, double time, double hbar) {
  if (!(time > 0.0) || !(hbar > 0.0)) {
    throw std::invalid_argument("log_unitary: time and hbar must be positive");
  }
  UnitaryEigensystem es = eigphases_unitary(u);
  RVec energies = (hbar / time) * es.phases;
  CMat h = es.vectors * energies.asDiagonal() * es.vectors.adjoint();
  return 0.5 * (h + h.adjoint());
}

CMat exp_hermitian_to_unitary(const CMat& h, double time, double hbar, int sign) {
  if (!(time > 0.0) || !(hbar > 0.0)) {
    throw std::invalid_argument("exp_hermitian_to_unitary: time and hbar must be positive");
  }
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("exp_hermitian_to_unitary: sign must be +1 or -1");
  }
  EigenDecomposition es = eig_hermitian(h);
  CVec phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    phases[i] = std::polar(1.0, sign * es.values[i] * time / hbar);
  }
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

}  // namespace kqr
