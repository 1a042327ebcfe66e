#include "kqr/qrc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kqr/matrixcore.hpp"
#include "kqr/rng.hpp"

namespace kqr {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RMat rows_subset(const RMat& m, const std::vector<int>& rows) {
  RMat out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

RVec vec_subset(const RVec& v, const std::vector<int>& rows) {
  RVec out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

}  // namespace

QrcDataset build_dataset(const IsingParams& base, double hz_lo, double hz_hi, int n_samples,
                         double test_fraction) {
  if (n_samples < 10) throw std::invalid_argument("build_dataset: need at least 10 samples");
  if (!(hz_hi > hz_lo)) throw std::invalid_argument("build_dataset: empty hz range");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("build_dataset: test_fraction must lie in (0, 1)");
  }
  QrcDataset d;
  d.n_qubits = base.n;
  d.params.resize(n_samples);
  d.targets.resize(n_samples);
  d.ground_energies.resize(n_samples);
  d.inputs.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    double hz = hz_lo + (hz_hi - hz_lo) * static_cast<double>(i) / (n_samples - 1);
    d.params[i] = hz;
    IsingParams p = base;
    p.hz = hz;
    EigenDecomposition es = eig_hermitian(build_ising(p));
    CVec ground = es.vectors.col(0);
    // Deterministic global phase: largest amplitude made real positive.
    Eigen::Index imax;
    ground.cwiseAbs().maxCoeff(&imax);
    Complex lead = ground[imax];
    ground *= std::conj(lead) / std::abs(lead);
    d.inputs.push_back(ground);
    d.ground_energies[i] = es.values[0];
    d.targets[i] = es.values[1];
    if (es.values[1] - es.values[0] < 1e-10) d.flagged.push_back(i);
  }
  // Central contiguous test band.
  int test_len = static_cast<int>(std::lround(test_fraction * n_samples));
  test_len = std::max(1, std::min(test_len, n_samples - 2));
  int test_start = (n_samples - test_len) / 2;
  for (int i = 0; i < n_samples; ++i) {
    if (i >= test_start && i < test_start + test_len) {
      d.test_indices.push_back(i);
    } else {
      d.train_indices.push_back(i);
    }
  }
  return d;
}

RidgeModel ridge_fit(const RMat& features, const RVec& targets, double gamma) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index cols = features.cols();
  if (rows != targets.size()) throw std::invalid_argument("ridge_fit: shape mismatch");
  if (gamma < 0.0) throw std::invalid_argument("ridge_fit: gamma must be nonnegative");
  RMat x(rows, cols + 1);
  x.leftCols(cols) = features;
  x.col(cols).setOnes();
  RMat gram = x.transpose() * x;
  for (Eigen::Index i = 0; i < cols; ++i) gram(i, i) += gamma;  // bias row unpenalized
  RVec rhs = x.transpose() * targets;
  if (gamma == 0.0) {
    Eigen::ColPivHouseholderQR<RMat> qr(gram);
    if (qr.rank() < gram.rows()) {
      throw std::runtime_error(
          "ridge_fit: rank-deficient features at gamma = 0; use gamma > 0");
    }
  }
  Eigen::LDLT<RMat> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("ridge_fit: normal-equation solve failed");
  }
  RVec sol = solver.solve(rhs);
  RidgeModel model;
  model.weights = sol.head(cols);
  model.bias = sol[cols];
  model.gamma = gamma;
  return model;
}

RVec ridge_predict(const RidgeModel& model, const RMat& features) {
  if (features.cols() != model.weights.size()) {
    throw std::invalid_argument("ridge_predict: feature width mismatch");
  }
  return (features * model.weights).array() + model.bias;
}

double evaluate(const RidgeModel& model, const RMat& features, const RVec& targets) {
  if (features.rows() != targets.size()) throw std::invalid_argument("evaluate: shape mismatch");
  RVec residual = ridge_predict(model, features) - targets;
  return residual.squaredNorm() / static_cast<double>(residual.size());
}

double select_gamma(const RMat& features, const RVec& targets, const RVec& gamma_grid,
                    int n_chunks) {
  const auto rows = static_cast<int>(features.rows());
  if (gamma_grid.size() < 1) throw std::invalid_argument("select_gamma: empty grid");
  if (rows < 2 * n_chunks) n_chunks = std::max(2, rows / 4);
  double best_gamma = gamma_grid[0];
  double best_err = std::numeric_limits<double>::infinity();
  for (Eigen::Index gi = 0; gi < gamma_grid.size(); ++gi) {
    double gamma = gamma_grid[gi];
    double err_sum = 0.0;
    int err_count = 0;
    for (int chunk = 0; chunk < n_chunks; ++chunk) {
      int lo = static_cast<int>(static_cast<long long>(chunk) * rows / n_chunks);
      int hi = static_cast<int>(static_cast<long long>(chunk + 1) * rows / n_chunks);
      if (hi <= lo) continue;
      std::vector<int> fit_rows, val_rows;
      for (int i = 0; i < rows; ++i) {
        if (i >= lo && i < hi) val_rows.push_back(i);
        else fit_rows.push_back(i);
      }
      RidgeModel model;
      try {
        model = ridge_fit(rows_subset(features, fit_rows), vec_subset(targets, fit_rows), gamma);
      } catch (const std::runtime_error&) {
        err_sum = std::numeric_limits<double>::infinity();
        err_count = 1;
        break;
      }
      RVec pred = ridge_predict(model, rows_subset(features, val_rows));
      err_sum += (pred - vec_subset(targets, val_rows)).squaredNorm();
      err_count += static_cast<int>(val_rows.size());
    }
    double err = err_sum / std::max(1, err_count);
    if (err < best_err) {
      best_err = err;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

RMat reservoir_features(const QrcDataset& dataset, const CircuitSpec& circuit) {
  if (circuit.n != dataset.n_qubits) {
    throw std::invalid_argument("reservoir_features: circuit width does not match dataset");
  }
  const auto rows = static_cast<Eigen::Index>(dataset.inputs.size());
  RMat feats(rows, 2 * dataset.n_qubits);
  for (Eigen::Index i = 0; i < rows; ++i) {
    CVec evolved = apply_circuit(circuit, dataset.inputs[static_cast<std::size_t>(i)]);
    feats.row(i) = pauli_features(evolved, dataset.n_qubits);
  }
  return feats;
}

RVec default_gamma_grid() {
  RVec grid(5);
  grid << 1e-8, 1e-6, 1e-4, 1e-2, 1.0;
  return grid;
}

FamilyBenchmark run_family_benchmark(const QrcDataset& dataset, Family family, int n_circuits,
                                     int depth, const RVec& gamma_grid, std::uint64_t seed) {
  if (n_circuits < 1) throw std::invalid_argument("run_family_benchmark: need n_circuits >= 1");
  FamilyBenchmark out;
  out.family = family;
  out.test_mses.reserve(static_cast<std::size_t>(n_circuits));
  for (int ci = 0; ci < n_circuits; ++ci) {
    CircuitSpec circuit = sample_circuit(family, dataset.n_qubits, depth,
                                         child_seed(seed, static_cast<std::uint64_t>(ci)));
    RMat feats = reservoir_features(dataset, circuit);
    RMat train_x = rows_subset(feats, dataset.train_indices);
    RVec train_y = vec_subset(dataset.targets, dataset.train_indices);
    double gamma = select_gamma(train_x, train_y, gamma_grid);
    RidgeModel model = ridge_fit(train_x, train_y, gamma);
    double mse = evaluate(model, rows_subset(feats, dataset.test_indices),
                          vec_subset(dataset.targets, dataset.test_indices));
    out.test_mses.push_back(mse);
    out.gammas.push_back(gamma);
  }
  std::vector<double> sorted = out.test_mses;
  std::sort(sorted.begin(), sorted.end());
  const auto m = sorted.size();
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  var = (m > 1) ? var / static_cast<double>(m - 1) : 0.0;
  out.summary.mean = mean;
  out.summary.median = (m % 2) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  out.summary.stddev = std::sqrt(var);
  return out;
}

std::string dataset_to_text(const QrcDataset& d) {
  std::ostringstream out;
  const auto dim = static_cast<Eigen::Index>(1) << d.n_qubits;
  out << "# n_qubits " << d.n_qubits << " samples " << d.params.size() << '\n';
  out << "# columns: hz e0 e1";
  for (Eigen::Index a = 0; a < dim; ++a) out << " re" << a << " im" << a;
  out << '\n';
  for (Eigen::Index i = 0; i < d.params.size(); ++i) {
    out << format_double(d.params[i]) << ' ' << format_double(d.ground_energies[i]) << ' '
        << format_double(d.targets[i]);
    const CVec& psi = d.inputs[static_cast<std::size_t>(i)];
    for (Eigen::Index a = 0; a < dim; ++a) {
      out << ' ' << format_double(psi[a].real()) << ' ' << format_double(psi[a].imag());
    }
    out << '\n';
  }
  return out.str();
}

QrcDataset dataset_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string hash, key;
  QrcDataset d;
  Eigen::Index n_samples = 0;
  in >> hash >> key >> d.n_qubits;
  std::string samples_key;
  in >> samples_key >> n_samples;
  if (hash != "#" || key != "n_qubits" || samples_key != "samples") {
    throw std::invalid_argument("dataset_from_text: malformed header");
  }
  std::string line;
  std::getline(in, line);  // rest of header line
  std::getline(in, line);  // column comment
  const auto dim = static_cast<Eigen::Index>(1) << d.n_qubits;
  d.params.resize(n_samples);
  d.targets.resize(n_samples);
  d.ground_energies.resize(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    if (!(in >> d.params[i] >> d.ground_energies[i] >> d.targets[i])) {
      throw std::invalid_argument("dataset_from_text: truncated table");
    }
    CVec psi(dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      double re, im;
      if (!(in >> re >> im)) throw std::invalid_argument("dataset_from_text: truncated row");
      psi[a] = Complex(re, im);
    }
    d.inputs.push_back(psi);
  }
  // Reconstruct the default split (central 30%).
  int n = static_cast<int>(n_samples);
  int test_len = static_cast<int>(std::lround(0.3 * n));
  test_len = std::max(1, std::min(test_len, n - 2));
  int test_start = (n - test_len) / 2;
  for (int i = 0; i < n; ++i) {
    if (i >= test_start && i < test_start + test_len) d.test_indices.push_back(i);
    else d.train_indices.push_back(i);
  }
  return d;
}

}  // namespace kqr
