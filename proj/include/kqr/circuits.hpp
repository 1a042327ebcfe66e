#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kqr/types.hpp"

namespace kqr {

enum class GateKind { CNOT, H, X, S, T, MATCHGATE, DIAG };

enum class Family { G1, G2, G3, MG, D2, D3, DN };

// One circuit element. Qubit 0 is the leftmost tensor factor (most
// significant bit) everywhere, including serialized output.
struct Gate {
  GateKind kind;
  std::vector<int> targets;          // CNOT: {control, target}
  Eigen::Matrix2cd block_a, block_b;  // MATCHGATE only; det(A) = det(B)
  std::vector<double> phases;        // DIAG only; 2^arity values in [0, 2*pi)
};

struct CircuitSpec {
  Family family;
  int n = 0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::vector<Gate> gates;
};

// Sparse Pauli-string expansion term; `paulis` is one character per qubit
// from {I, X, Y, Z}, qubit 0 first.
struct PauliTerm {
  std::string paulis;
  double coeff;
};

Family family_from_string(const std::string& name);
std::string family_to_string(Family f);

// Uniformly sampled circuit: gate kinds uniform over the family set, targets
// uniform over valid distinct tuples, MATCHGATE blocks Haar with matched
// determinants, DIAG phases i.i.d. uniform [0, 2*pi). The D2/D3/DN families
// ignore `depth`: they are two full Hadamard layers sandwiching their fixed
// count of diagonal gates in uniformly shuffled order.
CircuitSpec sample_circuit(Family family, int n, int depth, std::uint64_t seed);

// Dense 2^n x 2^n product of the gate embeddings, in application order.
CMat circuit_unitary(const CircuitSpec& c);

// Gate-local statevector application (never forms the dense unitary).
CVec apply_circuit(const CircuitSpec& c, const CVec& psi);

// (<X_0>, <Z_0>, ..., <X_{n-1}>, <Z_{n-1}>) by local contractions.
RVec pauli_features(const CVec& psi, int n);

// Coefficients of U P U^dagger in the n-qubit Pauli basis (entries with
// |coeff| > 1e-10). p is one of 'X', 'Y', 'Z'. Dense conjugation: n <= 8.
std::vector<PauliTerm> pauli_transfer(const CircuitSpec& c, char p, int qubit);

// Line-oriented text round trip: header "family n depth seed", one gate per
// line, 17-significant-digit parameters.
std::string circuit_to_text(const CircuitSpec& c);
CircuitSpec circuit_from_text(const std::string& text);

}  // namespace kqr
