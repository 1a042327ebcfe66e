#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kqr/circuits.hpp"
#include "kqr/spinmodels.hpp"
#include "kqr/types.hpp"

namespace kqr {

// Regression dataset: ground states of an Ising sweep in, first excited
// energies out. The test band is a contiguous interior window of the sweep.
struct QrcDataset {
  RVec params;              // swept hz values, ascending
  std::vector<CVec> inputs;  // normalized ground states
  RVec targets;             // E_1 per parameter
  RVec ground_energies;     // E_0 per parameter (exported for reference)
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::vector<int> flagged;  // samples with a near-degenerate ground state
  int n_qubits = 0;
};

struct RidgeModel {
  RVec weights;
  double bias = 0.0;
  double gamma = 0.0;
};

struct BenchmarkSummary {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

struct FamilyBenchmark {
  Family family;
  std::vector<double> test_mses;  // one per circuit
  std::vector<double> gammas;     // selected regularization per circuit
  BenchmarkSummary summary;
};

// Sweep hz over a uniform grid of n_samples points on [hz_lo, hz_hi] with
// the remaining couplings taken from `base`. The test split is the central
// contiguous `test_fraction` of the grid.
QrcDataset build_dataset(const IsingParams& base, double hz_lo, double hz_hi, int n_samples,
                         double test_fraction = 0.3);

// Closed-form ridge fit with an unpenalized bias column: solves
// (X^T X + gamma I) w = X^T y on the augmented system, bias row excluded
// from the penalty. gamma = 0 requires full-rank features.
RidgeModel ridge_fit(const RMat& features, const RVec& targets, double gamma);

RVec ridge_predict(const RidgeModel& model, const RMat& features);

// Mean squared residual; the regularization term is not included.
double evaluate(const RidgeModel& model, const RMat& features, const RVec& targets);

// Leave-chunk-out cross-validation over gamma_grid on the given rows
// (n_chunks contiguous blocks); returns the winning gamma.
double select_gamma(const RMat& features, const RVec& targets, const RVec& gamma_grid,
                    int n_chunks = 5);

// Reservoir feature matrix: rows are dataset samples, columns the 2n Pauli
// expectations of the circuit-evolved inputs.
RMat reservoir_features(const QrcDataset& dataset, const CircuitSpec& circuit);

// For each of n_circuits seeds: sample a circuit, push every dataset input
// through it, fit ridge on the train band (gamma by leave-chunk-out CV),
// record the test MSE.
FamilyBenchmark run_family_benchmark(const QrcDataset& dataset, Family family, int n_circuits,
                                     int depth, const RVec& gamma_grid, std::uint64_t seed);

RVec default_gamma_grid();

// Text table round trip: hz, E0, E1, then interleaved re/im amplitudes.
std::string dataset_to_text(const QrcDataset& d);
QrcDataset dataset_from_text(const std::string& text);

}  // namespace kqr
