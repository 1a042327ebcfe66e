#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "kqr/circuits.hpp"
#include "kqr/matrixcore.hpp"

using namespace kqr;
using kqr::testing::max_abs_diff;

namespace {

CMat gate_matrix(GateKind kind) {
  CMat m;
  const double is = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::H:
      m = CMat(2, 2);
      m << is, is, is, -is;
      break;
    case GateKind::X:
      m = CMat(2, 2);
      m << 0, 1, 1, 0;
      break;
    case GateKind::S:
      m = CMat(2, 2);
      m << 1, 0, 0, Complex(0, 1);
      break;
    case GateKind::T:
      m = CMat(2, 2);
      m << 1, 0, 0, std::polar(1.0, kPi / 4);
      break;
    default:
      m = CMat::Identity(2, 2);
  }
  return m;
}

}  // namespace

TEST_CASE("sampled circuits only contain their family's gate set") {
  struct Expect {
    Family family;
    std::set<GateKind> allowed;
  };
  std::vector<Expect> table = {
      {Family::G1, {GateKind::CNOT, GateKind::H, GateKind::X}},
      {Family::G2, {GateKind::CNOT, GateKind::H, GateKind::S}},
      {Family::G3, {GateKind::CNOT, GateKind::H, GateKind::T}},
      {Family::MG, {GateKind::MATCHGATE}},
      {Family::D2, {GateKind::H, GateKind::DIAG}},
      {Family::D3, {GateKind::H, GateKind::DIAG}},
      {Family::DN, {GateKind::H, GateKind::DIAG}},
  };
  for (const auto& e : table) {
    CircuitSpec c = sample_circuit(e.family, 5, 30, 11);
    CHECK(!c.gates.empty());
    for (const Gate& g : c.gates) {
      CHECK(e.allowed.count(g.kind) == 1);
      for (int t : g.targets) {
        CHECK(t >= 0);
        CHECK(t < 5);
      }
    }
  }
}

TEST_CASE("gate-set circuits have the requested depth and distinct CNOT wires") {
  for (Family f : {Family::G1, Family::G2, Family::G3}) {
    CircuitSpec c = sample_circuit(f, 4, 25, 3);
    CHECK(c.gates.size() == 25);
    for (const Gate& g : c.gates) {
      if (g.kind == GateKind::CNOT) {
        REQUIRE(g.targets.size() == 2);
        CHECK(g.targets[0] != g.targets[1]);
      } else {
        CHECK(g.targets.size() == 1);
      }
    }
  }
}

TEST_CASE("matchgate circuits have determinant-matched blocks") {
  CircuitSpec c = sample_circuit(Family::MG, 6, 40, 5);
  CHECK(c.gates.size() == 40);
  for (const Gate& g : c.gates) {
    REQUIRE(g.kind == GateKind::MATCHGATE);
    REQUIRE(g.targets.size() == 2);
    CHECK(g.targets[0] != g.targets[1]);
    Complex da = g.block_a.determinant();
    Complex db = g.block_b.determinant();
    CHECK(std::abs(da - db) < 1e-12);
    CHECK(max_abs_diff(CMat(g.block_a * g.block_a.adjoint()), CMat::Identity(2, 2)) < 1e-12);
    CHECK(max_abs_diff(CMat(g.block_b * g.block_b.adjoint()), CMat::Identity(2, 2)) < 1e-12);
  }
}

TEST_CASE("diagonal families are Hadamard layers around a shuffled diagonal core") {
  const int n = 6;
  CircuitSpec c2 = sample_circuit(Family::D2, n, 0, 21);
  // n Hadamards, C(6,2) = 15 diagonal gates, n Hadamards.
  REQUIRE(c2.gates.size() == 6 + 15 + 6);
  for (int i = 0; i < n; ++i) {
    CHECK(c2.gates[static_cast<std::size_t>(i)].kind == GateKind::H);
    CHECK(c2.gates[c2.gates.size() - 1 - static_cast<std::size_t>(i)].kind == GateKind::H);
  }
  std::set<std::vector<int>> supports;
  for (std::size_t i = 6; i < 21; ++i) {
    const Gate& g = c2.gates[i];
    REQUIRE(g.kind == GateKind::DIAG);
    REQUIRE(g.targets.size() == 2);
    REQUIRE(g.phases.size() == 4);
    for (double ph : g.phases) {
      CHECK(ph >= 0.0);
      CHECK(ph < kTwoPi);
    }
    std::vector<int> sorted_targets = g.targets;
    std::sort(sorted_targets.begin(), sorted_targets.end());
    supports.insert(sorted_targets);
  }
  CHECK(supports.size() == 15);  // every pair appears exactly once

  CircuitSpec c3 = sample_circuit(Family::D3, n, 0, 21);
  CHECK(c3.gates.size() == 6 + 20 + 6);  // C(6,3) = 20 triples
  CircuitSpec cn = sample_circuit(Family::DN, n, 0, 21);
  REQUIRE(cn.gates.size() == 6 + 1 + 6);
  CHECK(cn.gates[6].phases.size() == 64);  // one global diagonal
}

TEST_CASE("sampling is deterministic in the seed and sensitive to it") {
  for (Family f : {Family::G3, Family::MG, Family::D2}) {
    CircuitSpec a = sample_circuit(f, 5, 20, 77);
    CircuitSpec b = sample_circuit(f, 5, 20, 77);
    CHECK(circuit_to_text(a) == circuit_to_text(b));
    CircuitSpec c = sample_circuit(f, 5, 20, 78);
    CHECK(circuit_to_text(a) != circuit_to_text(c));
  }
}

TEST_CASE("circuit_unitary embeds a single-qubit gate at the right position") {
  // One Hadamard on qubit 0 of two: H acts on the most significant bit,
  // so the unitary is H (x) I.
  CircuitSpec c;
  c.family = Family::G1;
  c.n = 2;
  c.depth = 1;
  c.seed = 0;
  Gate g;
  g.kind = GateKind::H;
  g.targets = {0};
  c.gates.push_back(g);
  CMat expected = kron(gate_matrix(GateKind::H), CMat::Identity(2, 2));
  CHECK(max_abs_diff(circuit_unitary(c), expected) < 1e-15);

  c.gates[0].targets = {1};  // now the least significant bit
  expected = kron(CMat::Identity(2, 2), gate_matrix(GateKind::H));
  CHECK(max_abs_diff(circuit_unitary(c), expected) < 1e-15);
}

TEST_CASE("circuit_unitary applies a CNOT with the stated bit convention") {
  CircuitSpec c;
  c.family = Family::G1;
  c.n = 2;
  c.depth = 1;
  c.seed = 0;
  Gate g;
  g.kind = GateKind::CNOT;
  g.targets = {0, 1};  // control qubit 0 (MSB), target qubit 1
  c.gates.push_back(g);
  CMat u = circuit_unitary(c);
  // Basis order |00>, |01>, |10>, |11>: flips the low bit when the high bit
  // is set.
  CMat expected = CMat::Zero(4, 4);
  expected(0, 0) = 1;
  expected(1, 1) = 1;
  expected(2, 3) = 1;
  expected(3, 2) = 1;
  CHECK(max_abs_diff(u, expected) < 1e-15);
}

TEST_CASE("matchgates act on the parity blocks") {
  CircuitSpec c;
  c.family = Family::MG;
  c.n = 2;
  c.depth = 1;
  c.seed = 0;
  Gate g;
  g.kind = GateKind::MATCHGATE;
  g.targets = {0, 1};
  g.block_a << Complex(0, 1), 0, 0, Complex(0, 1);   // acts on |00>, |11>
  g.block_b << 0, Complex(-1, 0), Complex(1, 0), 0;  // acts on |01>, |10>
  c.gates.push_back(g);
  CMat u = circuit_unitary(c);
  CHECK(std::abs(u(0, 0) - Complex(0, 1)) < 1e-15);
  CHECK(std::abs(u(3, 3) - Complex(0, 1)) < 1e-15);
  CHECK(std::abs(u(1, 2) - Complex(-1, 0)) < 1e-15);
  CHECK(std::abs(u(2, 1) - Complex(1, 0)) < 1e-15);
  // Even-odd mixing entries vanish.
  CHECK(std::abs(u(0, 1)) == 0.0);
  CHECK(std::abs(u(2, 3)) == 0.0);
}

TEST_CASE("apply_circuit agrees with the dense unitary on every family") {
  SplitMix64 rng(1234);
  for (Family f : {Family::G1, Family::G2, Family::G3, Family::MG, Family::D2, Family::D3,
                   Family::DN}) {
    const int n = 5;
    CircuitSpec c = sample_circuit(f, n, 25, 900 + static_cast<std::uint64_t>(f));
    CMat u = circuit_unitary(c);
    CHECK(max_abs_diff(u * u.adjoint(), CMat::Identity(u.rows(), u.cols())) < 1e-12);
    CVec psi = testing::random_complex_gaussian(rng, 1 << n).col(0);
    psi.normalize();
    CVec via_gates = apply_circuit(c, psi);
    CVec via_dense = u * psi;
    CHECK((via_gates - via_dense).norm() < 1e-12);
  }
}

TEST_CASE("circuit text serialization round trips bit for bit") {
  for (Family f : {Family::G2, Family::MG, Family::DN}) {
    CircuitSpec c = sample_circuit(f, 4, 15, 314159);
    std::string text = circuit_to_text(c);
    CircuitSpec back = circuit_from_text(text);
    CHECK(back.n == c.n);
    CHECK(back.depth == c.depth);
    CHECK(back.seed == c.seed);
    CHECK(family_to_string(back.family) == family_to_string(c.family));
    REQUIRE(back.gates.size() == c.gates.size());
    CHECK(circuit_to_text(back) == text);
    CHECK(max_abs_diff(circuit_unitary(back), circuit_unitary(c)) == 0.0);
  }
}

TEST_CASE("family names round trip and reject junk") {
  for (Family f : {Family::G1, Family::G2, Family::G3, Family::MG, Family::D2, Family::D3,
                   Family::DN}) {
    CHECK(family_from_string(family_to_string(f)) == f);
  }
  CHECK_THROWS_AS(family_from_string("G9"), std::invalid_argument);
}

TEST_CASE("pauli_features on computational and superposition states") {
  const int n = 3;
  CVec zero = CVec::Zero(8);
  zero[0] = 1.0;  // |000>: <Z> = 1, <X> = 0 on every qubit
  RVec f = pauli_features(zero, n);
  REQUIRE(f.size() == 2 * n);
  for (int q = 0; q < n; ++q) {
    CHECK(f[2 * q] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f[2 * q + 1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  CVec plus = CVec::Constant(8, Complex(1.0 / std::sqrt(8.0), 0.0));  // |+++>
  f = pauli_features(plus, n);
  for (int q = 0; q < n; ++q) {
    CHECK(f[2 * q] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(f[2 * q + 1] == doctest::Approx(0.0).epsilon(1e-13));
  }
}

TEST_CASE("pauli_features matches a dense operator oracle") {
  SplitMix64 rng(55);
  const int n = 4;
  CVec psi = testing::random_complex_gaussian(rng, 1 << n).col(0);
  psi.normalize();
  RVec f = pauli_features(psi, n);
  CMat x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  for (int q = 0; q < n; ++q) {
    CMat left = CMat::Identity(1 << q, 1 << q);
    CMat right = CMat::Identity(1 << (n - q - 1), 1 << (n - q - 1));
    CMat xq = kron(kron(left, x), right);
    CMat zq = kron(kron(left, z), right);
    Complex ex = psi.adjoint() * (xq * psi);
    Complex ez = psi.adjoint() * (zq * psi);
    CHECK(f[2 * q] == doctest::Approx(ex.real()).epsilon(1e-12));
    CHECK(f[2 * q + 1] == doctest::Approx(ez.real()).epsilon(1e-12));
  }
}

TEST_CASE("pauli_transfer of the identity circuit returns the input string") {
  CircuitSpec c;
  c.family = Family::G1;
  c.n = 3;
  c.depth = 0;
  c.seed = 0;
  std::vector<PauliTerm> terms = pauli_transfer(c, 'Z', 0);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].paulis == "ZII");
  CHECK(terms[0].coeff == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pauli_transfer follows textbook conjugations") {
  // H Z H = X.
  CircuitSpec c;
  c.family = Family::G1;
  c.n = 2;
  c.depth = 1;
  c.seed = 0;
  Gate g;
  g.kind = GateKind::H;
  g.targets = {0};
  c.gates.push_back(g);
  std::vector<PauliTerm> terms = pauli_transfer(c, 'Z', 0);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].paulis == "XI");
  CHECK(terms[0].coeff == doctest::Approx(1.0).epsilon(1e-12));

  // CNOT propagates Z on the target onto Z (x) Z.
  c.gates[0].kind = GateKind::CNOT;
  c.gates[0].targets = {0, 1};
  terms = pauli_transfer(c, 'Z', 1);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].paulis == "ZZ");
  CHECK(terms[0].coeff == doctest::Approx(1.0).epsilon(1e-12));

  // T rotates X into the XY plane: two terms with squared weights 1/2 each.
  c.gates[0].kind = GateKind::T;
  c.gates[0].targets = {0};
  terms = pauli_transfer(c, 'X', 0);
  REQUIRE(terms.size() == 2);
  double total = 0.0;
  for (const PauliTerm& t : terms) total += t.coeff * t.coeff;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pauli_transfer weights always sum to one in squared modulus") {
  for (Family f : {Family::G2, Family::G3}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CircuitSpec c = sample_circuit(f, 4, 20, seed);
      std::vector<PauliTerm> terms = pauli_transfer(c, 'Z', 0);
      double total = 0.0;
      for (const PauliTerm& t : terms) total += t.coeff * t.coeff;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      if (f == Family::G2) CHECK(terms.size() == 1);  // Clifford: a single string
    }
  }
}
