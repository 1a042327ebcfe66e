#include "kqr/spinmodels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kqr/matrixcore.hpp"

namespace kqr {

namespace {

constexpr int kMaxSites = 14;  // dim 16384; builders refuse beyond this

// Reverse the n low bits of s.
unsigned reverse_bits(unsigned s, int n) {
  unsigned r = 0;
  for (int i = 0; i < n; ++i) {
    r = (r << 1) | ((s >> i) & 1u);
  }
  return r;
}

}  // namespace

CMat build_ising(const IsingParams& p) {
  if (p.n < 2) throw std::invalid_argument("build_ising: need n >= 2");
  if (p.n > kMaxSites) {
    throw std::runtime_error("build_ising: n = " + std::to_string(p.n) +
                             " exceeds the memory budget (max " + std::to_string(kMaxSites) + ")");
  }
  const unsigned dim = 1u << p.n;
  CMat h = CMat::Zero(dim, dim);
  for (unsigned s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (int k = 0; k < p.n; ++k) {
      // Site k lives on bit (n-1-k); bit value 0 means spin up (Z = +1).
      double zk = ((s >> (p.n - 1 - k)) & 1u) ? -1.0 : 1.0;
      diag += p.hz * zk;
      if (k + 1 < p.n) {
        double zk1 = ((s >> (p.n - 2 - k)) & 1u) ? -1.0 : 1.0;
        diag -= p.j_coupling * zk * zk1;
      }
      // Transverse field flips site k.
      unsigned flipped = s ^ (1u << (p.n - 1 - k));
      h(flipped, s) += p.hx;
    }
    h(s, s) += diag;
  }
  return h;
}

ParityBasis parity_basis(int n) {
  if (n < 2) throw std::invalid_argument("parity_basis: need n >= 2");
  if (n > kMaxSites) throw std::runtime_error("parity_basis: n exceeds the memory budget");
  const unsigned dim = 1u << n;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<std::pair<unsigned, unsigned>> cols;
  for (unsigned s = 0; s < dim; ++s) {
    unsigned r = reverse_bits(s, n);
    if (s <= r) cols.emplace_back(s, r);
  }
  ParityBasis out;
  out.n = n;
  out.basis = CMat::Zero(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto [s, r] = cols[c];
    if (s == r) {
      out.basis(s, static_cast<Eigen::Index>(c)) = 1.0;
    } else {
      out.basis(s, static_cast<Eigen::Index>(c)) = inv_sqrt2;
      out.basis(r, static_cast<Eigen::Index>(c)) = inv_sqrt2;
    }
  }
  return out;
}

CMat project_operator(const CMat& m, const ParityBasis& basis) {
  const Eigen::Index dim = basis.basis.rows();
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument("project_operator: dimension mismatch");
  }
  // Commutator with the reflection permutation, applied without forming R:
  // (MR)_{ij} = M_{i, rev(j)}, (RM)_{ij} = M_{rev(i), j}.
  double comm = 0.0;
  const int n = basis.n;
  for (Eigen::Index i = 0; i < dim; ++i) {
    unsigned ri = reverse_bits(static_cast<unsigned>(i), n);
    for (Eigen::Index j = 0; j < dim; ++j) {
      unsigned rj = reverse_bits(static_cast<unsigned>(j), n);
      comm = std::max(comm, std::abs(m(i, rj) - m(ri, j)));
    }
  }
  if (comm > 1e-9) {
    throw std::runtime_error("project_operator: input does not commute with the reflection, "
                             "||[M,R]||_max = " + std::to_string(comm));
  }
  return basis.basis.adjoint() * m * basis.basis;
}

CMat build_standard_map(const StandardMapParams& p) {
  const int n = p.n_hilbert;
  if (n < 2) throw std::invalid_argument("build_standard_map: need n_hilbert >= 2");
  const double hbar = 1.0 / (kTwoPi * n);
  CVec kick(n), kinetic(n);
  RVec x(n), p_grid(n);
  for (int j = 0; j < n; ++j) {
    x[j] = (j + p.bloch_x) / n;
    // Integer momentum shifts centered on zero: m - floor(N/2) in [-N/2, N/2).
    double m_shift = j - n / 2;
    p_grid[j] = (m_shift + p.bloch_p) / n;
  }
  for (int j = 0; j < n; ++j) {
    // Kick angle (k N / 2pi) cos(2 pi x): k is the classical stochasticity
    // parameter of the map (kick potential k cos(2 pi x) / (2 pi)^2).
    kick[j] = std::polar(1.0, -(p.k_chaos * n / kTwoPi) * std::cos(kTwoPi * x[j]));
    kinetic[j] = std::polar(1.0, -p_grid[j] * p_grid[j] / (2.0 * hbar));
  }
  // Discrete Fourier transform with the Bloch-phase twist.
  CMat f(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m) {
    double pm = (m - n / 2) + p.bloch_p;
    for (int j = 0; j < n; ++j) {
      f(m, j) = std::polar(norm, -kTwoPi * pm * (j + p.bloch_x) / n);
    }
  }
  CMat u = f.adjoint() * (kinetic.asDiagonal() * f) * kick.asDiagonal();
  double err = (u * u.adjoint() - CMat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw std::runtime_error("build_standard_map: unitarity defect " + std::to_string(err));
  }
  return u;
}

std::vector<CVec> eigenstate_bank(const CMat& h_or_u, const BankSelection& sel) {
  if (!(sel.lo_frac >= 0.0 && sel.hi_frac <= 1.0 && sel.lo_frac < sel.hi_frac)) {
    throw std::invalid_argument("eigenstate_bank: need 0 <= lo_frac < hi_frac <= 1");
  }
  const Eigen::Index dim = h_or_u.rows();
  CMat vectors;
  double herm_defect = (h_or_u - h_or_u.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect <= 1e-9 * std::max(1.0, h_or_u.cwiseAbs().maxCoeff())) {
    vectors = eig_hermitian(h_or_u).vectors;
  } else {
    vectors = eigphases_unitary(h_or_u).vectors;  // throws if not unitary either
  }
  auto lo = static_cast<Eigen::Index>(std::llround(sel.lo_frac * dim));
  auto hi = static_cast<Eigen::Index>(std::llround(sel.hi_frac * dim));
  hi = std::min(hi, dim);
  if (hi - lo < 1) throw std::runtime_error("eigenstate_bank: empty selection window");
  Eigen::Index window = hi - lo;
  Eigen::Index count = (sel.max_count > 0) ? std::min<Eigen::Index>(sel.max_count, window)
                                           : window;
  std::vector<CVec> bank;
  bank.reserve(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    // Even index stride across the window (endpoints included when count > 1).
    Eigen::Index idx =
        (count == 1) ? lo
                     : lo + (i * (window - 1)) / (count - 1);
    bank.push_back(vectors.col(idx));
  }
  return bank;
}

}  // namespace kqr
