#include "kqr/circuits.hpp"

#include <Eigen/QR>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "kqr/rng.hpp"

namespace kqr {

namespace {

Eigen::Matrix2cd gate_h() {
  Eigen::Matrix2cd m;
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

Eigen::Matrix2cd gate_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd gate_s() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, Complex(0, 1);
  return m;
}

Eigen::Matrix2cd gate_t() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, std::polar(1.0, kPi / 4.0);
  return m;
}

Eigen::Matrix4cd gate_cnot() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

// G(A, B): A acts on the even-parity pair {|00>, |11>}, B on {|01>, |10>}.
Eigen::Matrix4cd matchgate_matrix(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = a(0, 0);
  m(0, 3) = a(0, 1);
  m(3, 0) = a(1, 0);
  m(3, 3) = a(1, 1);
  m(1, 1) = b(0, 0);
  m(1, 2) = b(0, 1);
  m(2, 1) = b(1, 0);
  m(2, 2) = b(1, 1);
  return m;
}

Eigen::Matrix2cd haar_2x2(SplitMix64& rng) {
  Eigen::Matrix2cd g;
  g << rng.normal_complex(), rng.normal_complex(), rng.normal_complex(), rng.normal_complex();
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(g);
  Eigen::Matrix2cd q = qr.householderQ();
  Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 2; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
  }
  return q;
}

int bit_of(int n, int qubit) { return n - 1 - qubit; }

void check_targets(const Gate& g, int n) {
  for (std::size_t i = 0; i < g.targets.size(); ++i) {
    if (g.targets[i] < 0 || g.targets[i] >= n) {
      throw std::invalid_argument("circuits: gate target out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (g.targets[i] == g.targets[j]) {
        throw std::invalid_argument("circuits: gate targets must be distinct");
      }
    }
  }
}

// Dense matrix of a gate in its own 2^k target space, diagonal gates aside.
CMat gate_dense(const Gate& g) {
  switch (g.kind) {
    case GateKind::H:
      return gate_h();
    case GateKind::X:
      return gate_x();
    case GateKind::S:
      return gate_s();
    case GateKind::T:
      return gate_t();
    case GateKind::CNOT:
      return gate_cnot();
    case GateKind::MATCHGATE:
      return matchgate_matrix(g.block_a, g.block_b);
    case GateKind::DIAG: {
      const auto dim = static_cast<Eigen::Index>(g.phases.size());
      CMat m = CMat::Zero(dim, dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        m(i, i) = std::polar(1.0, g.phases[static_cast<std::size_t>(i)]);
      }
      return m;
    }
  }
  throw std::logic_error("circuits: unknown gate kind");
}

// Apply a dense 2^k gate matrix to the statevector on the ordered target
// list. Index convention inside the gate: target 0 is the most significant
// gate bit, matching the global qubit-0-leftmost convention.
void apply_dense_gate(CVec& psi, const CMat& gate, const std::vector<int>& targets, int n) {
  const int k = static_cast<int>(targets.size());
  const auto sub = static_cast<unsigned>(1u << k);
  std::vector<unsigned> masks(targets.size());
  for (int i = 0; i < k; ++i) masks[static_cast<std::size_t>(i)] = 1u << bit_of(n, targets[static_cast<std::size_t>(i)]);
  unsigned all_mask = 0;
  for (unsigned m : masks) all_mask |= m;
  const unsigned dim = 1u << n;
  CVec scratch(sub);
  for (unsigned base = 0; base < dim; ++base) {
    if (base & all_mask) continue;  // enumerate states with all target bits clear
    for (unsigned r = 0; r < sub; ++r) {
      unsigned s = base;
      for (int i = 0; i < k; ++i) {
        if (r & (1u << (k - 1 - i))) s |= masks[static_cast<std::size_t>(i)];
      }
      scratch[r] = psi[s];
    }
    for (unsigned r = 0; r < sub; ++r) {
      Complex acc = 0;
      for (unsigned c = 0; c < sub; ++c) acc += gate(r, c) * scratch[c];
      unsigned s = base;
      for (int i = 0; i < k; ++i) {
        if (r & (1u << (k - 1 - i))) s |= masks[static_cast<std::size_t>(i)];
      }
      psi[s] = acc;
    }
  }
}

// Diagonal gates touch every amplitude once; no scatter/gather needed.
void apply_diag_gate(CVec& psi, const Gate& g, int n) {
  const int k = static_cast<int>(g.targets.size());
  const unsigned dim = 1u << n;
  for (unsigned s = 0; s < dim; ++s) {
    unsigned idx = 0;
    for (int i = 0; i < k; ++i) {
      idx = (idx << 1) | ((s >> bit_of(n, g.targets[static_cast<std::size_t>(i)])) & 1u);
    }
    psi[s] *= std::polar(1.0, g.phases[idx]);
  }
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  // Lexicographic enumeration of k-subsets of {0..n-1}.
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++cur[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i) {
      cur[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
  return out;
}

void append_hadamard_layer(CircuitSpec& c) {
  for (int q = 0; q < c.n; ++q) {
    Gate g;
    g.kind = GateKind::H;
    g.targets = {q};
    c.gates.push_back(g);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Family family_from_string(const std::string& name) {
  if (name == "G1") return Family::G1;
  if (name == "G2") return Family::G2;
  if (name == "G3") return Family::G3;
  if (name == "MG") return Family::MG;
  if (name == "D2") return Family::D2;
  if (name == "D3") return Family::D3;
  if (name == "DN") return Family::DN;
  throw std::invalid_argument("unknown circuit family: " + name);
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::G1: return "G1";
    case Family::G2: return "G2";
    case Family::G3: return "G3";
    case Family::MG: return "MG";
    case Family::D2: return "D2";
    case Family::D3: return "D3";
    case Family::DN: return "DN";
  }
  throw std::logic_error("unknown family value");
}

CircuitSpec sample_circuit(Family family, int n, int depth, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_circuit: need n >= 2");
  CircuitSpec c;
  c.family = family;
  c.n = n;
  c.depth = depth;
  c.seed = seed;
  SplitMix64 rng(seed);

  auto ordered_pair = [&](int& q1, int& q2) {
    q1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    q2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (q2 >= q1) ++q2;
  };

  switch (family) {
    case Family::G1:
    case Family::G2:
    case Family::G3: {
      if (depth < 1) throw std::invalid_argument("sample_circuit: need depth >= 1");
      GateKind third = (family == Family::G1)   ? GateKind::X
                       : (family == Family::G2) ? GateKind::S
                                                : GateKind::T;
      for (int g = 0; g < depth; ++g) {
        Gate gate;
        std::uint64_t kind = rng.below(3);
        if (kind == 0) {
          gate.kind = GateKind::CNOT;
          int q1, q2;
          ordered_pair(q1, q2);
          gate.targets = {q1, q2};
        } else {
          gate.kind = (kind == 1) ? GateKind::H : third;
          gate.targets = {static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))};
        }
        c.gates.push_back(gate);
      }
      break;
    }
    case Family::MG: {
      if (depth < 1) throw std::invalid_argument("sample_circuit: need depth >= 1");
      for (int g = 0; g < depth; ++g) {
        Gate gate;
        gate.kind = GateKind::MATCHGATE;
        int q1, q2;
        ordered_pair(q1, q2);
        gate.targets = {q1, q2};
        gate.block_a = haar_2x2(rng);
        gate.block_b = haar_2x2(rng);
        // Rotate B so the determinants match (phase on the principal branch).
        Complex ratio = gate.block_a.determinant() / gate.block_b.determinant();
        gate.block_b *= std::polar(1.0, std::arg(ratio) / 2.0);
        c.gates.push_back(gate);
      }
      break;
    }
    case Family::D2:
    case Family::D3:
    case Family::DN: {
      int arity = (family == Family::D2) ? 2 : (family == Family::D3) ? 3 : n;
      if (n < arity) throw std::invalid_argument("sample_circuit: n below gate arity");
      append_hadamard_layer(c);
      std::vector<std::vector<int>> combos = combinations(n, arity);
      std::vector<Gate> diag_gates;
      diag_gates.reserve(combos.size());
      for (const auto& targets : combos) {
        Gate gate;
        gate.kind = GateKind::DIAG;
        gate.targets = targets;
        gate.phases.resize(1u << arity);
        for (double& ph : gate.phases) ph = rng.uniform(0.0, kTwoPi);
        diag_gates.push_back(std::move(gate));
      }
      // Uniform random ordering (Fisher-Yates).
      for (std::size_t i = diag_gates.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(diag_gates[i - 1], diag_gates[j]);
      }
      for (auto& gate : diag_gates) c.gates.push_back(std::move(gate));
      append_hadamard_layer(c);
      break;
    }
  }
  for (const Gate& g : c.gates) check_targets(g, n);
  return c;
}

CMat circuit_unitary(const CircuitSpec& c) {
  if (c.n > 14) throw std::runtime_error("circuit_unitary: dimension exceeds the memory budget");
  const unsigned dim = 1u << c.n;
  CMat u = CMat::Identity(dim, dim);
  for (const Gate& g : c.gates) {
    check_targets(g, c.n);
    CMat embed = CMat::Zero(dim, dim);
    if (g.kind == GateKind::DIAG) {
      for (unsigned s = 0; s < dim; ++s) {
        unsigned idx = 0;
        for (std::size_t i = 0; i < g.targets.size(); ++i) {
          idx = (idx << 1) | ((s >> bit_of(c.n, g.targets[i])) & 1u);
        }
        embed(s, s) = std::polar(1.0, g.phases[idx]);
      }
    } else {
      CMat dense = gate_dense(g);
      const int k = static_cast<int>(g.targets.size());
      const unsigned sub = 1u << k;
      std::vector<unsigned> masks(g.targets.size());
      for (int i = 0; i < k; ++i) masks[static_cast<std::size_t>(i)] = 1u << bit_of(c.n, g.targets[static_cast<std::size_t>(i)]);
      unsigned all_mask = 0;
      for (unsigned m : masks) all_mask |= m;
      for (unsigned base = 0; base < dim; ++base) {
        if (base & all_mask) continue;
        for (unsigned col = 0; col < sub; ++col) {
          unsigned sc = base;
          for (int i = 0; i < k; ++i) {
            if (col & (1u << (k - 1 - i))) sc |= masks[static_cast<std::size_t>(i)];
          }
          for (unsigned row = 0; row < sub; ++row) {
            unsigned sr = base;
            for (int i = 0; i < k; ++i) {
              if (row & (1u << (k - 1 - i))) sr |= masks[static_cast<std::size_t>(i)];
            }
            embed(sr, sc) = dense(row, col);
          }
        }
      }
    }
    u = embed * u;
  }
  return u;
}

CVec apply_circuit(const CircuitSpec& c, const CVec& psi) {
  const unsigned dim = 1u << c.n;
  if (psi.size() != static_cast<Eigen::Index>(dim)) {
    throw std::invalid_argument("apply_circuit: state dimension mismatch");
  }
  if (std::abs(psi.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("apply_circuit: state must be normalized");
  }
  CVec out = psi;
  for (const Gate& g : c.gates) {
    check_targets(g, c.n);
    if (g.kind == GateKind::DIAG) {
      apply_diag_gate(out, g, c.n);
    } else {
      apply_dense_gate(out, gate_dense(g), g.targets, c.n);
    }
  }
  return out;
}

RVec pauli_features(const CVec& psi, int n) {
  const unsigned dim = 1u << n;
  if (psi.size() != static_cast<Eigen::Index>(dim)) {
    throw std::invalid_argument("pauli_features: state dimension mismatch");
  }
  if (std::abs(psi.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("pauli_features: state must be normalized");
  }
  RVec feats(2 * n);
  for (int q = 0; q < n; ++q) {
    const unsigned mask = 1u << bit_of(n, q);
    double z = 0.0;
    Complex x = 0.0;
    for (unsigned s = 0; s < dim; ++s) {
      double p = std::norm(psi[s]);
      z += (s & mask) ? -p : p;
      if (!(s & mask)) x += std::conj(psi[s]) * psi[s | mask];
    }
    feats[2 * q] = 2.0 * x.real();
    feats[2 * q + 1] = z;
  }
  return feats;
}

std::vector<PauliTerm> pauli_transfer(const CircuitSpec& c, char p, int qubit) {
  if (c.n > 8) throw std::runtime_error("pauli_transfer: dense conjugation limited to n <= 8");
  if (qubit < 0 || qubit >= c.n) throw std::invalid_argument("pauli_transfer: qubit out of range");
  if (p != 'X' && p != 'Y' && p != 'Z') {
    throw std::invalid_argument("pauli_transfer: p must be one of X, Y, Z");
  }
  const unsigned dim = 1u << c.n;
  const unsigned mask = 1u << bit_of(c.n, qubit);
  CMat pauli = CMat::Zero(dim, dim);
  for (unsigned s = 0; s < dim; ++s) {
    switch (p) {
      case 'X':
        pauli(s ^ mask, s) = 1.0;
        break;
      case 'Y':
        pauli(s ^ mask, s) = (s & mask) ? Complex(0, -1) : Complex(0, 1);
        break;
      case 'Z':
        pauli(s, s) = (s & mask) ? -1.0 : 1.0;
        break;
    }
  }
  CMat u = circuit_unitary(c);
  CMat m = u * pauli * u.adjoint();

  std::vector<PauliTerm> terms;
  const char labels[4] = {'I', 'X', 'Y', 'Z'};
  const auto strings = static_cast<std::uint64_t>(1) << (2 * c.n);
  for (std::uint64_t code = 0; code < strings; ++code) {
    // Two bits per qubit, qubit 0 in the highest pair: 0=I, 1=X, 2=Y, 3=Z.
    unsigned flip = 0;
    std::string label(static_cast<std::size_t>(c.n), 'I');
    for (int q = 0; q < c.n; ++q) {
      auto digit = static_cast<unsigned>((code >> (2 * (c.n - 1 - q))) & 3u);
      label[static_cast<std::size_t>(q)] = labels[digit];
      if (digit == 1 || digit == 2) flip |= 1u << bit_of(c.n, q);
    }
    Complex acc = 0.0;
    for (unsigned s = 0; s < dim; ++s) {
      const unsigned t = s ^ flip;
      // <s|P|t> as a product of single-qubit factors.
      Complex factor = 1.0;
      for (int q = 0; q < c.n; ++q) {
        auto digit = static_cast<unsigned>((code >> (2 * (c.n - 1 - q))) & 3u);
        const unsigned qb = (t >> bit_of(c.n, q)) & 1u;
        if (digit == 2) factor *= qb ? Complex(0, -1) : Complex(0, 1);
        else if (digit == 3) factor *= qb ? -1.0 : 1.0;
      }
      acc += factor * m(t, s);
    }
    acc /= static_cast<double>(dim);
    if (std::abs(acc) > 1e-10) {
      if (std::abs(acc.imag()) > 1e-9) {
        throw std::runtime_error("pauli_transfer: non-real coefficient encountered");
      }
      terms.push_back({label, acc.real()});
    }
  }
  return terms;
}

std::string circuit_to_text(const CircuitSpec& c) {
  std::ostringstream out;
  out << family_to_string(c.family) << ' ' << c.n << ' ' << c.depth << ' ' << c.seed << '\n';
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::CNOT:
        out << "CNOT " << g.targets[0] << ' ' << g.targets[1] << '\n';
        break;
      case GateKind::H:
        out << "H " << g.targets[0] << '\n';
        break;
      case GateKind::X:
        out << "X " << g.targets[0] << '\n';
        break;
      case GateKind::S:
        out << "S " << g.targets[0] << '\n';
        break;
      case GateKind::T:
        out << "T " << g.targets[0] << '\n';
        break;
      case GateKind::MATCHGATE: {
        out << "MATCHGATE " << g.targets[0] << ' ' << g.targets[1];
        for (const auto* block : {&g.block_a, &g.block_b}) {
          for (int r = 0; r < 2; ++r) {
            for (int col = 0; col < 2; ++col) {
              out << ' ' << format_double((*block)(r, col).real()) << ' '
                  << format_double((*block)(r, col).imag());
            }
          }
        }
        out << '\n';
        break;
      }
      case GateKind::DIAG: {
        out << "DIAG " << g.targets.size();
        for (int t : g.targets) out << ' ' << t;
        for (double ph : g.phases) out << ' ' << format_double(ph);
        out << '\n';
        break;
      }
    }
  }
  return out.str();
}

CircuitSpec circuit_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string family_name;
  CircuitSpec c;
  if (!(in >> family_name >> c.n >> c.depth >> c.seed)) {
    throw std::invalid_argument("circuit_from_text: malformed header");
  }
  c.family = family_from_string(family_name);
  std::string kind;
  while (in >> kind) {
    Gate g;
    if (kind == "CNOT") {
      g.kind = GateKind::CNOT;
      int a, b;
      in >> a >> b;
      g.targets = {a, b};
    } else if (kind == "H" || kind == "X" || kind == "S" || kind == "T") {
      g.kind = (kind == "H")   ? GateKind::H
               : (kind == "X") ? GateKind::X
               : (kind == "S") ? GateKind::S
                               : GateKind::T;
      int q;
      in >> q;
      g.targets = {q};
    } else if (kind == "MATCHGATE") {
      g.kind = GateKind::MATCHGATE;
      int a, b;
      in >> a >> b;
      g.targets = {a, b};
      for (auto* block : {&g.block_a, &g.block_b}) {
        for (int r = 0; r < 2; ++r) {
          for (int col = 0; col < 2; ++col) {
            double re, im;
            in >> re >> im;
            (*block)(r, col) = Complex(re, im);
          }
        }
      }
    } else if (kind == "DIAG") {
      g.kind = GateKind::DIAG;
      std::size_t arity;
      in >> arity;
      g.targets.resize(arity);
      for (auto& t : g.targets) in >> t;
      g.phases.resize(1u << arity);
      for (auto& ph : g.phases) in >> ph;
    } else {
      throw std::invalid_argument("circuit_from_text: unknown gate kind " + kind);
    }
    if (!in) throw std::invalid_argument("circuit_from_text: truncated gate line");
    c.gates.push_back(std::move(g));
  }
  for (const Gate& g : c.gates) check_targets(g, c.n);
  return c;
}

}  // namespace kqr
