#include "kqr/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kqr/circuits.hpp"
#include "kqr/krylov.hpp"
#include "kqr/matrixcore.hpp"
#include "kqr/plot.hpp"
#include "kqr/qrc.hpp"
#include "kqr/rng.hpp"
#include "kqr/spectralstats.hpp"
#include "kqr/spinmodels.hpp"

namespace kqr::experiments {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Small utilities

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Index-sharded worker pool. Tasks write into pre-sized slots, so results
// are identical for any thread count; exceptions are re-thrown in task order.
template <typename Fn>
void parallel_for(int n_tasks, int threads, Fn&& fn) {
  if (n_tasks <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_tasks));
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (threads <= 1 || n_tasks == 1) {
    for (int i = 0; i < n_tasks; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    int pool_size = std::min(threads, n_tasks);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int t = 0; t < pool_size; ++t) {
      pool.emplace_back([&] {
        for (int i; (i = next.fetch_add(1)) < n_tasks;) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

std::vector<double> rank_transform(const std::vector<double>& v) {
  const std::size_t m = v.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

json conventions_json() {
  return json{
      {"qubit_order", "qubit 0 is the leftmost tensor factor (most significant bit)"},
      {"rng", "splitmix64 with child streams seed ^ (0x9E3779B97F4A7C15 * (index + 1))"},
      {"hbar_standard_map", "1/(2*pi*N)"},
      {"kick_phase", "(k*N/(2*pi))*cos(2*pi*x); k is the classical stochasticity parameter"},
      {"bloch_defaults", "bloch_x = 0, bloch_p = 0.25"},
      {"eps_b", "1e-10 * ||H||_max"},
      {"plateau", "mean over the final half of the time grid; t_max = tmax_factor * D / <b>"},
      {"scrambling", "first crossing of half the plateau mean, linearly interpolated"},
      {"variance", "per-sequence sample variance (N-1); ensembles report the mean over runs"},
      {"heisenberg", "2*pi*hbar / (central-80% trimmed mean spacing)"},
      {"rbar_levels", "line statistic; spacings below 1e-12*range collapsed"},
      {"rbar_phases", "circular closure; degenerate phases kept as zero spacings"},
      {"reservoir_time", "H_eff extracted at T = 1 with hbar = 1"},
      {"reservoir_initial_state", "computational basis state from the circuit's child stream"},
      {"connectivity", "all-to-all for two-qubit gate placement"},
      {"unitary_sign", "U = exp(+i H T / hbar)"},
  };
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_metadata(const RunContext& ctx, const std::string& experiment,
                    const std::string& csv_path, const json& extra = json::object()) {
  json meta;
  meta["experiment"] = experiment;
  meta["config_hash"] = config_hash(experiment, ctx);
  meta["seed"] = ctx.seed;
  meta["full_scale"] = ctx.full_scale;
  json cfg = json::object();
  for (const auto& [k, v] : ctx.cfg.values) cfg[k] = v;
  meta["config"] = cfg;
  meta["conventions"] = conventions_json();
  meta["version"] = kVersion;
  meta["timestamp"] = iso_timestamp();  // informational only; not hashed
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  std::ofstream out(csv_path + ".meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

std::string out_path(const RunContext& ctx, const std::string& filename) {
  std::filesystem::create_directories(ctx.out_dir);
  return (std::filesystem::path(ctx.out_dir) / filename).string();
}

CMat projected_ising(int n, double hz) {
  IsingParams p;
  p.n = n;
  p.hx = 1.0;
  p.hz = hz;
  p.j_coupling = 1.0;
  return project_operator(build_ising(p), parity_basis(n));
}

// Lowest-lying eigenstates of the integrable reference Hamiltonian.
std::vector<CVec> low_edge_bank(const CMat& h_ref, int count) {
  EigenDecomposition es = eig_hermitian(h_ref);
  std::vector<CVec> bank;
  bank.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count && i < es.vectors.cols(); ++i) bank.push_back(es.vectors.col(i));
  return bank;
}

struct TsEstimate {
  double median = 0.0;
  int excluded = 0;
  int used = 0;
};

TsEstimate median_scrambling_time(const CMat& h, const std::vector<CVec>& bank,
                                  double tmax_factor, int n_times) {
  std::vector<double> ts;
  TsEstimate out;
  for (const CVec& v : bank) {
    LanczosSequence seq = lanczos_state(h, v, default_eps_b(h), h.rows(), /*store_basis=*/false);
    double t_max = tmax_factor * static_cast<double>(seq.dim()) /
                   std::max(seq.b.size() > 0 ? seq.b.mean() : 1.0, 1e-300);
    ComplexitySeries series = k_complexity_series(seq, t_max, n_times);
    try {
      ts.push_back(scrambling_time(series));
    } catch (const NotReachedError&) {
      ++out.excluded;
    }
  }
  if (ts.empty()) throw std::runtime_error("median_scrambling_time: no run reached its plateau");
  std::sort(ts.begin(), ts.end());
  out.used = static_cast<int>(ts.size());
  out.median = (ts.size() % 2) ? ts[ts.size() / 2]
                               : 0.5 * (ts[ts.size() / 2 - 1] + ts[ts.size() / 2]);
  return out;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Effective generator plus eigenphases with a single Schur pass.
struct HeffResult {
  CMat h;
  RVec phases;
  bool wrapped = false;
};

HeffResult heff_from_unitary(const CMat& u, double time, double hbar) {
  UnitaryEigensystem es = eigphases_unitary(u);
  HeffResult out;
  RVec energies = (hbar / time) * es.phases;
  CMat h = es.vectors * energies.asDiagonal() * es.vectors.adjoint();
  out.h = 0.5 * (h + h.adjoint());
  out.phases = es.phases;
  double margin = kPi * 1e-6;
  out.wrapped = (es.phases[0] <= -kPi + margin) || (es.phases[es.phases.size() - 1] >= kPi - margin);
  return out;
}

// Per-circuit reservoir statistics shared by E5 and E6.
struct CircuitStats {
  double rbar = 0.0;
  double var_a = 0.0, var_b = 0.0;
  double ck_plateau = 0.0;
  int krylov_dim = 0;
  bool ok = false;
};

CircuitStats reservoir_circuit_stats(Family family, int n, int depth, std::uint64_t circuit_seed,
                                     int n_times) {
  CircuitStats out;
  CircuitSpec circuit = sample_circuit(family, n, depth, circuit_seed);
  CMat u = circuit_unitary(circuit);
  HeffResult heff = heff_from_unitary(u, 1.0, 1.0);
  out.rbar = r_statistic_phases(heff.phases);
  const auto dim = u.rows();
  SplitMix64 state_rng(child_seed(circuit_seed, 1));
  auto basis_index = static_cast<Eigen::Index>(state_rng.below(static_cast<std::uint64_t>(dim)));
  CVec psi = CVec::Zero(dim);
  psi[basis_index] = 1.0;
  double eps = default_eps_b(heff.h);
  if (!(eps > 0.0)) eps = 1e-300;  // identity-like circuit: H_eff can be exactly zero
  LanczosSequence seq = lanczos_state(heff.h, psi, eps, dim, /*store_basis=*/false);
  out.krylov_dim = static_cast<int>(seq.dim());
  if (seq.dim() < 2) return out;  // stationary state: no usable statistics
  LanczosVariances lv = lanczos_variances(seq, 1.0);
  out.var_a = lv.var_a;
  out.var_b = lv.var_b;
  out.ck_plateau = k_complexity_series(seq, n_times).plateau_mean;
  out.ok = true;
  return out;
}

std::vector<Family> parse_families(const Config& cfg) {
  std::string spec = cfg.get("families", "G1,G2,G3,MG,D2,D3,DN");
  std::vector<Family> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(family_from_string(trim(item)));
  if (out.empty()) throw std::invalid_argument("families list is empty");
  return out;
}

int circuits_for(int n, const RunContext& ctx) {
  int cfg_val = ctx.cfg.get_int("n_circuits", 0);
  if (cfg_val > 0) return cfg_val;
  if (ctx.full_scale) return 100;
  if (n <= 6) return 100;
  if (n == 8) return 25;
  return 10;
}

std::string reservoir_hash(int n, int n_circuits, int depth, std::uint64_t seed,
                           const std::vector<Family>& families) {
  std::ostringstream ss;
  ss << "n=" << n << ";circuits=" << n_circuits << ";depth=" << depth << ";seed=" << seed
     << ";families=";
  for (Family f : families) ss << family_to_string(f) << ',';
  return hex16(fnv1a(ss.str()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
  }
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: list key '" + key + "' has a bad entry: " + item);
    }
  }
  if (out.empty()) throw std::invalid_argument("config: list key '" + key + "' is empty");
  return out;
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key=value, got: " + line);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key in line: " + line);
    cfg.values[key] = value;
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

std::string config_hash(const std::string& experiment, const RunContext& ctx) {
  std::ostringstream canon;
  canon << experiment << '\n';
  canon << "seed=" << ctx.seed << '\n';
  canon << "full_scale=" << (ctx.full_scale ? 1 : 0) << '\n';
  for (const auto& [k, v] : ctx.cfg.values) {  // std::map: already sorted
    if (k == "out" || k == "threads") continue;
    canon << k << '=' << v << '\n';
  }
  return hex16(fnv1a(canon.str()));
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: need two equal-length vectors of size >= 2");
  }
  double mx = mean_of(x), my = mean_of(y);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(rank_transform(x), rank_transform(y));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need two equal-length vectors of size >= 2");
  }
  const auto m = static_cast<double>(x.size());
  double mx = mean_of(x), my = mean_of(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.slope_stderr = (x.size() > 2) ? std::sqrt(ss_res / (m - 2.0) / sxx) : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// E1: scrambling-time scaling

E1Result run_e1_scrambling_scaling(const RunContext& ctx) {
  std::vector<double> ns_d = ctx.cfg.get_list("n_grid", ctx.full_scale
                                                            ? std::vector<double>{6, 8, 10, 12}
                                                            : std::vector<double>{6, 8, 10});
  const double hz_ref = ctx.cfg.get_double("hz_ref", 0.05);
  const double hz_int = ctx.cfg.get_double("hz_integrable", 6.0);
  const int bank_count = ctx.cfg.get_int("bank_count", 8);
  const int n_times = ctx.cfg.get_int("n_times", 801);
  const double tmax_factor = ctx.cfg.get_double("tmax_factor", 5.0);

  E1Result result;
  result.ns.resize(ns_d.size());
  result.median_ts.resize(ns_d.size());
  result.excluded.resize(ns_d.size());
  parallel_for(static_cast<int>(ns_d.size()), ctx.threads, [&](int i) {
    int n = static_cast<int>(ns_d[static_cast<std::size_t>(i)]);
    CMat h_chaotic = projected_ising(n, hz_ref);
    CMat h_ref = projected_ising(n, hz_int);
    std::vector<CVec> bank = low_edge_bank(h_ref, bank_count);
    TsEstimate est = median_scrambling_time(h_chaotic, bank, tmax_factor, n_times);
    result.ns[static_cast<std::size_t>(i)] = n;
    result.median_ts[static_cast<std::size_t>(i)] = est.median;
    result.excluded[static_cast<std::size_t>(i)] = est.excluded;
  });

  std::vector<double> log_n, log_t;
  for (std::size_t i = 0; i < result.ns.size(); ++i) {
    log_n.push_back(std::log(static_cast<double>(result.ns[i])));
    log_t.push_back(std::log(result.median_ts[i]));
  }
  LineFit fit = fit_line(log_n, log_t);
  result.exponent = fit.slope;
  result.exponent_ci = 1.96 * fit.slope_stderr;

  CsvTable table;
  table.header = {"n", "median_ts", "bank_size", "excluded", "exponent", "exponent_ci95"};
  for (std::size_t i = 0; i < result.ns.size(); ++i) {
    table.rows.push_back({std::to_string(result.ns[i]), format17(result.median_ts[i]),
                          std::to_string(bank_count), std::to_string(result.excluded[i]),
                          format17(result.exponent), format17(result.exponent_ci)});
  }
  result.csv_path = out_path(ctx, "e1_scrambling.csv");
  write_csv(result.csv_path, table);
  write_metadata(ctx, "E1", result.csv_path);
  return result;
}

// ---------------------------------------------------------------------------
// E2: spacing-ratio statistics of the effective generator

E2Result run_e2_rbar_heff(const RunContext& ctx) {
  const int n = ctx.cfg.get_int("n", 10);
  std::vector<double> hz_grid = ctx.cfg.get_list(
      "hz_grid", {0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0});
  const double hz_int = ctx.cfg.get_double("hz_integrable", 6.0);
  const int bank_ts = ctx.cfg.get_int("bank_count_ts", 4);
  const int n_times = ctx.cfg.get_int("n_times", 801);
  const double tmax_factor = ctx.cfg.get_double("tmax_factor", 5.0);
  const double hbar = 1.0;

  CMat h_ref = projected_ising(n, hz_int);
  std::vector<CVec> bank = low_edge_bank(h_ref, bank_ts);

  E2Result result;
  result.rows.resize(hz_grid.size());
  parallel_for(static_cast<int>(hz_grid.size()), ctx.threads, [&](int i) {
    double hz = hz_grid[static_cast<std::size_t>(i)];
    CMat h = projected_ising(n, hz);
    EigenDecomposition es = eig_hermitian(h);
    E2Row row;
    row.hz = hz;
    row.rbar_h = r_statistic(es.values);
    row.t_s = median_scrambling_time(h, bank, tmax_factor, n_times).median;
    row.t_h = heisenberg_time(es.values, hbar);
    const double times[3] = {row.t_s / 25.0, row.t_s, row.t_h};
    double rbars[3];
    int wraps[3];
    const double spread = es.values[es.values.size() - 1] - es.values[0];
    for (int ti = 0; ti < 3; ++ti) {
      CMat u = exp_hermitian_to_unitary(h, times[ti], hbar, +1);
      UnitaryEigensystem es_u = eigphases_unitary(u);
      RVec levels = (hbar / times[ti]) * es_u.phases;  // the generator's spectrum
      rbars[ti] = r_statistic(levels);
      // Phases leave the principal branch once the spectral spread exceeds 2*pi.
      wraps[ti] = (spread * times[ti] / hbar > kTwoPi) ? 1 : 0;
    }
    row.rbar_ts25 = rbars[0];
    row.rbar_ts = rbars[1];
    row.rbar_th = rbars[2];
    row.wrap_ts25 = wraps[0];
    row.wrap_ts = wraps[1];
    row.wrap_th = wraps[2];
    result.rows[static_cast<std::size_t>(i)] = row;
  });

  CsvTable table;
  table.header = {"hz",      "rbar_h",  "ts",        "th",      "rbar_heff_ts25",
                  "rbar_heff_ts", "rbar_heff_th", "wrap_ts25", "wrap_ts", "wrap_th"};
  for (const E2Row& r : result.rows) {
    table.rows.push_back({format17(r.hz), format17(r.rbar_h), format17(r.t_s), format17(r.t_h),
                          format17(r.rbar_ts25), format17(r.rbar_ts), format17(r.rbar_th),
                          std::to_string(r.wrap_ts25), std::to_string(r.wrap_ts),
                          std::to_string(r.wrap_th)});
  }
  result.csv_path = out_path(ctx, "e2_rbar_heff.csv");
  write_csv(result.csv_path, table);
  write_metadata(ctx, "E2", result.csv_path);
  return result;
}

// ---------------------------------------------------------------------------
// E3: Lanczos statistics across the Ising sweep

E3Result run_e3_krylov_ising(const RunContext& ctx) {
  const int n = ctx.cfg.get_int("n", 10);
  std::vector<double> hz_grid =
      ctx.cfg.get_list("hz_grid", {0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5});
  std::vector<double> fractions = ctx.cfg.get_list("ls_fractions", {1.0, 0.5, 0.25, 0.125});
  const double hz_int = ctx.cfg.get_double("hz_integrable", 6.0);
  const int bank_count = ctx.cfg.get_int("bank_count", 8);
  const int bank_ts = ctx.cfg.get_int("bank_count_ts", 4);
  const int n_times = ctx.cfg.get_int("n_times", 401);
  const int ts_times = ctx.cfg.get_int("ts_n_times", 801);
  const double tmax_factor = ctx.cfg.get_double("tmax_factor", 5.0);
  const double hbar = 1.0;
  std::string sources_cfg = ctx.cfg.get("sources", "H,Heff_ts25,Heff_ts,Heff_th");
  std::vector<std::string> sources;
  {
    std::stringstream ss(sources_cfg);
    std::string item;
    while (std::getline(ss, item, ',')) sources.push_back(trim(item));
  }

  CMat h_ref = projected_ising(n, hz_int);
  // Mid-spectrum bank: central 20% of the integrable reference, strided.
  BankSelection mid_sel{0.4, 0.6, bank_count};
  std::vector<CVec> mid_bank = eigenstate_bank(h_ref, mid_sel);
  std::vector<CVec> edge_bank = low_edge_bank(h_ref, bank_ts);

  bool need_heff = false;
  for (const auto& s : sources) need_heff |= (s != "H");

  std::vector<std::vector<E3Row>> rows_per_hz(hz_grid.size());
  parallel_for(static_cast<int>(hz_grid.size()), ctx.threads, [&](int i) {
    double hz = hz_grid[static_cast<std::size_t>(i)];
    CMat h = projected_ising(n, hz);
    double t_s = 0.0, t_h = 0.0;
    if (need_heff) {
      t_s = median_scrambling_time(h, edge_bank, tmax_factor, ts_times).median;
      t_h = heisenberg_time(eig_hermitian(h).values, hbar);
    }
    for (const std::string& source : sources) {
      CMat m;
      if (source == "H") {
        m = h;
      } else {
        double t = (source == "Heff_ts25") ? t_s / 25.0
                   : (source == "Heff_ts") ? t_s
                   : (source == "Heff_th") ? t_h
                                           : -1.0;
        if (t <= 0.0) throw std::invalid_argument("run_e3: unknown source " + source);
        CMat u = exp_hermitian_to_unitary(h, t, hbar, +1);
        m = heff_from_unitary(u, t, hbar).h;
      }
      std::vector<LanczosSequence> seqs;
      seqs.reserve(mid_bank.size());
      for (const CVec& v : mid_bank) {
        seqs.push_back(lanczos_state(m, v, default_eps_b(m), m.rows(), /*store_basis=*/false));
      }
      for (double f : fractions) {
        std::vector<double> va, vb, cks;
        for (const LanczosSequence& seq : seqs) {
          LanczosVariances lv = lanczos_variances(seq, f);
          va.push_back(lv.var_a);
          vb.push_back(lv.var_b);
          cks.push_back(k_complexity_truncated(seq, f, n_times).plateau_mean);
        }
        E3Row row;
        row.hz = hz;
        row.source = source;
        row.ls_fraction = f;
        row.var_a = mean_of(va);
        row.var_b = mean_of(vb);
        row.ck_mean = mean_of(cks);
        row.ck_var = sample_variance(cks);
        rows_per_hz[static_cast<std::size_t>(i)].push_back(row);
      }
    }
  });

  E3Result result;
  for (const auto& rows : rows_per_hz) {
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  CsvTable table;
  table.header = {"hz", "source", "ls_fraction", "var_a", "var_b", "ck_mean", "ck_var"};
  for (const E3Row& r : result.rows) {
    table.rows.push_back({format17(r.hz), r.source, format17(r.ls_fraction), format17(r.var_a),
                          format17(r.var_b), format17(r.ck_mean), format17(r.ck_var)});
  }
  result.csv_path = out_path(ctx, "e3_krylov_ising.csv");
  write_csv(result.csv_path, table);
  write_metadata(ctx, "E3", result.csv_path);
  return result;
}

// ---------------------------------------------------------------------------
// E4: quantized standard map

E4Result run_e4_standard_map(const RunContext& ctx) {
  std::vector<double> k_grid = ctx.cfg.get_list("k_grid", {0.1, 0.5, 1.0, 2.0, 5.0, 10.0});
  std::vector<double> n_grid = ctx.cfg.get_list("n_grid", {200});
  const double k_integrable = ctx.cfg.get_double("k_integrable", 0.01);
  const int bank_count = ctx.cfg.get_int("bank_count", 100);
  const int n_times = ctx.cfg.get_int("n_times", 401);
  const double bloch_x = ctx.cfg.get_double("bloch_x", 0.0);
  const double bloch_p = ctx.cfg.get_double("bloch_p", 0.25);

  E4Result result;
  for (double n_val : n_grid) {
    int n_hilbert = static_cast<int>(n_val);
    const double hbar = 1.0 / (kTwoPi * n_hilbert);
    StandardMapParams integrable{n_hilbert, k_integrable, bloch_x, bloch_p};
    // Mid-spectrum band wide enough to hold the requested bank.
    double half_span = std::min(0.5, 0.5 * static_cast<double>(bank_count) / n_hilbert);
    BankSelection sel{0.5 - half_span, 0.5 + half_span, bank_count};
    std::vector<CVec> bank = eigenstate_bank(build_standard_map(integrable), sel);

    std::vector<E4Row> rows(k_grid.size());
    parallel_for(static_cast<int>(k_grid.size()), ctx.threads, [&](int i) {
      double k = k_grid[static_cast<std::size_t>(i)];
      StandardMapParams p{n_hilbert, k, bloch_x, bloch_p};
      CMat u = build_standard_map(p);
      HeffResult heff = heff_from_unitary(u, 1.0, hbar);
      E4Row row;
      row.k = k;
      row.n_hilbert = n_hilbert;
      row.rbar = r_statistic_phases(heff.phases);
      std::vector<double> va, vb, cks;
      for (const CVec& v : bank) {
        LanczosSequence seq =
            lanczos_state(heff.h, v, default_eps_b(heff.h), heff.h.rows(), /*store_basis=*/false);
        if (seq.dim() < 2) continue;
        LanczosVariances lv = lanczos_variances(seq, 1.0);
        va.push_back(lv.var_a);
        vb.push_back(lv.var_b);
        cks.push_back(k_complexity_series(seq, n_times).plateau_mean);
      }
      if (va.empty()) throw std::runtime_error("run_e4: every bank state was stationary");
      row.var_a = mean_of(va);
      row.var_b = mean_of(vb);
      row.ck_mean = mean_of(cks);
      row.ck_var = sample_variance(cks);
      rows[static_cast<std::size_t>(i)] = row;
    });
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }

  CsvTable table;
  table.header = {"k", "n_hilbert", "rbar", "var_a", "var_b", "ck_mean", "ck_var"};
  for (const E4Row& r : result.rows) {
    table.rows.push_back({format17(r.k), std::to_string(r.n_hilbert), format17(r.rbar),
                          format17(r.var_a), format17(r.var_b), format17(r.ck_mean),
                          format17(r.ck_var)});
  }
  result.csv_path = out_path(ctx, "e4_standard_map.csv");
  write_csv(result.csv_path, table);
  write_metadata(ctx, "E4", result.csv_path);
  return result;
}

// ---------------------------------------------------------------------------
// E5: reservoir Krylov statistics

E5Result run_e5_reservoir_krylov(const RunContext& ctx) {
  std::vector<Family> families = parse_families(ctx.cfg);
  std::vector<double> n_grid = ctx.cfg.get_list("qubit_grid", {6});
  const int depth = ctx.cfg.get_int("depth", 40);
  const int n_times = ctx.cfg.get_int("n_times", 401);

  E5Result result;
  json failures = json::object();
  for (double n_val : n_grid) {
    int n = static_cast<int>(n_val);
    int n_circuits = circuits_for(n, ctx);
    const double dim = std::pow(2.0, n);
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      Family family = families[fi];
      std::uint64_t family_seed = child_seed(ctx.seed, fi);
      std::vector<CircuitStats> stats(static_cast<std::size_t>(n_circuits));
      parallel_for(n_circuits, ctx.threads, [&](int ci) {
        stats[static_cast<std::size_t>(ci)] = reservoir_circuit_stats(
            family, n, depth, child_seed(family_seed, static_cast<std::uint64_t>(ci)), n_times);
      });
      std::vector<double> va, vb, cks, rbars, dims;
      int failed = 0;
      for (const CircuitStats& s : stats) {
        if (!s.ok) {
          ++failed;
          continue;
        }
        va.push_back(s.var_a);
        vb.push_back(s.var_b);
        cks.push_back(s.ck_plateau);
        rbars.push_back(s.rbar);
        dims.push_back(static_cast<double>(s.krylov_dim));
      }
      if (va.empty()) throw std::runtime_error("run_e5: no usable circuit in family " +
                                               family_to_string(family));
      E5Row row;
      row.family = family_to_string(family);
      row.n = n;
      row.var_a = mean_of(va);
      row.var_b = mean_of(vb);
      row.ck_over_dim = mean_of(cks) / dim;
      row.var_ck_over_dim = sample_variance(cks) / dim;
      row.rbar = mean_of(rbars);
      row.mean_krylov_dim = mean_of(dims);
      result.rows.push_back(row);
      if (failed > 0) failures[row.family + "_n" + std::to_string(n)] = failed;
    }
  }

  CsvTable table;
  table.header = {"family", "n",    "var_a",           "var_b", "ck_over_dim",
                  "var_ck_over_dim", "rbar", "mean_krylov_dim"};
  for (const E5Row& r : result.rows) {
    table.rows.push_back({r.family, std::to_string(r.n), format17(r.var_a), format17(r.var_b),
                          format17(r.ck_over_dim), format17(r.var_ck_over_dim), format17(r.rbar),
                          format17(r.mean_krylov_dim)});
  }
  result.csv_path = out_path(ctx, "e5_reservoir_krylov.csv");
  write_csv(result.csv_path, table);
  int n0 = static_cast<int>(n_grid[0]);
  json extra;
  extra["per_circuit_failures"] = failures;
  extra["reservoir_hash"] =
      reservoir_hash(n0, circuits_for(n0, ctx), depth, ctx.seed, families);
  write_metadata(ctx, "E5", result.csv_path, extra);
  return result;
}

// ---------------------------------------------------------------------------
// E6: reservoir-computing benchmark and correlation report

E6Result run_e6_qrc_benchmark(const RunContext& ctx) {
  std::vector<Family> families = parse_families(ctx.cfg);
  const int n = ctx.cfg.get_int("n", 6);
  const int depth = ctx.cfg.get_int("depth", 40);
  const int n_times = ctx.cfg.get_int("n_times", 401);
  const int n_circuits = circuits_for(n, ctx);
  const double hz_lo = ctx.cfg.get_double("hz_lo", 0.0);
  const double hz_hi = ctx.cfg.get_double("hz_hi", 2.0);
  const int n_samples = ctx.cfg.get_int("n_samples", 80);
  std::vector<double> gamma_list =
      ctx.cfg.get_list("gamma_grid", {1e-8, 1e-6, 1e-4, 1e-2, 1.0});
  RVec gamma_grid(static_cast<Eigen::Index>(gamma_list.size()));
  for (std::size_t i = 0; i < gamma_list.size(); ++i) {
    gamma_grid[static_cast<Eigen::Index>(i)] = gamma_list[i];
  }

  IsingParams base;
  base.n = n;
  QrcDataset dataset = build_dataset(base, hz_lo, hz_hi, n_samples,
                                     ctx.cfg.get_double("test_fraction", 0.3));

  E6Result result;
  const auto n_fam = families.size();
  result.families.resize(n_fam);
  result.mean_mse.resize(n_fam);
  result.median_mse.resize(n_fam);
  result.std_mse.resize(n_fam);
  result.family_rbar.resize(n_fam);
  result.family_ck_over_dim.resize(n_fam);
  result.family_var_ck.resize(n_fam);
  std::vector<double> range_norm_mse(n_fam);

  const std::string own_hash = reservoir_hash(n, n_circuits, depth, ctx.seed, families);
  std::string e5_csv = ctx.cfg.get("e5_csv", "");
  std::vector<E5Row> stat_rows;
  if (!e5_csv.empty()) {
    // Reuse a previous reservoir-statistics run, but only if it was produced
    // by the identical (n, circuits, depth, seed, families) recipe.
    std::ifstream meta_in(e5_csv + ".meta.json");
    if (!meta_in) throw std::invalid_argument("run_e6: missing metadata for " + e5_csv);
    json meta = json::parse(meta_in);
    std::string their_hash = meta.value("reservoir_hash", "");
    if (their_hash != own_hash) {
      throw std::runtime_error("run_e6: reservoir hash mismatch (" + their_hash + " vs " +
                               own_hash + "); refusing to mix rows from different runs");
    }
    CsvTable t = read_csv(e5_csv);
    int fam_c = t.column("family"), n_c = t.column("n"), ck_c = t.column("ck_over_dim");
    int vck_c = t.column("var_ck_over_dim"), rb_c = t.column("rbar");
    if (fam_c < 0 || n_c < 0 || ck_c < 0 || vck_c < 0 || rb_c < 0) {
      throw std::runtime_error("run_e6: reservoir CSV lacks the expected columns");
    }
    for (const auto& row : t.rows) {
      if (std::stoi(row[static_cast<std::size_t>(n_c)]) != n) continue;
      E5Row r;
      r.family = row[static_cast<std::size_t>(fam_c)];
      r.ck_over_dim = std::stod(row[static_cast<std::size_t>(ck_c)]);
      r.var_ck_over_dim = std::stod(row[static_cast<std::size_t>(vck_c)]);
      r.rbar = std::stod(row[static_cast<std::size_t>(rb_c)]);
      stat_rows.push_back(r);
    }
  }

  std::vector<FamilyBenchmark> benches(n_fam);
  parallel_for(static_cast<int>(n_fam), ctx.threads, [&](int fi) {
    Family family = families[static_cast<std::size_t>(fi)];
    std::uint64_t family_seed = child_seed(ctx.seed, static_cast<std::uint64_t>(fi));
    benches[static_cast<std::size_t>(fi)] =
        run_family_benchmark(dataset, family, n_circuits, depth, gamma_grid, family_seed);
  });

  const double dim = std::pow(2.0, n);
  double target_range = dataset.targets.maxCoeff() - dataset.targets.minCoeff();
  for (std::size_t fi = 0; fi < n_fam; ++fi) {
    Family family = families[fi];
    std::string name = family_to_string(family);
    result.families[fi] = name;
    result.mean_mse[fi] = benches[fi].summary.mean;
    result.median_mse[fi] = benches[fi].summary.median;
    result.std_mse[fi] = benches[fi].summary.stddev;
    range_norm_mse[fi] = benches[fi].summary.mean / (target_range * target_range);

    const E5Row* found = nullptr;
    for (const E5Row& r : stat_rows) {
      if (r.family == name) found = &r;
    }
    if (found) {
      result.family_rbar[fi] = found->rbar;
      result.family_ck_over_dim[fi] = found->ck_over_dim;
      result.family_var_ck[fi] = found->var_ck_over_dim;
    } else {
      // Same seeds as E5, so the statistics match a fresh E5 run bit-for-bit.
      std::uint64_t family_seed = child_seed(ctx.seed, static_cast<std::uint64_t>(fi));
      std::vector<CircuitStats> stats(static_cast<std::size_t>(n_circuits));
      parallel_for(n_circuits, ctx.threads, [&](int ci) {
        stats[static_cast<std::size_t>(ci)] = reservoir_circuit_stats(
            family, n, depth, child_seed(family_seed, static_cast<std::uint64_t>(ci)), n_times);
      });
      std::vector<double> cks, rbars;
      for (const CircuitStats& s : stats) {
        if (!s.ok) continue;
        cks.push_back(s.ck_plateau);
        rbars.push_back(s.rbar);
      }
      result.family_rbar[fi] = mean_of(rbars);
      result.family_ck_over_dim[fi] = mean_of(cks) / dim;
      result.family_var_ck[fi] = sample_variance(cks) / dim;
    }
  }

  result.corr_mse_rbar = spearman(result.mean_mse, result.family_rbar);
  result.corr_mse_ck = spearman(result.mean_mse, result.family_ck_over_dim);
  result.corr_mse_var_ck = spearman(result.mean_mse, result.family_var_ck);

  // Permutation null: shuffle family labels of the statistics vectors.
  const int n_perms = ctx.cfg.get_int("n_permutations", 100);
  SplitMix64 perm_rng(child_seed(ctx.seed, 0xFEEDull));
  int exceed_rbar = 0, exceed_ck = 0;
  for (int p = 0; p < n_perms; ++p) {
    std::vector<std::size_t> perm(n_fam);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n_fam; i > 1; --i) {
      std::size_t j = perm_rng.below(i);
      std::swap(perm[i - 1], perm[j]);
    }
    std::vector<double> rbar_p(n_fam), ck_p(n_fam);
    for (std::size_t i = 0; i < n_fam; ++i) {
      rbar_p[i] = result.family_rbar[perm[i]];
      ck_p[i] = result.family_ck_over_dim[perm[i]];
    }
    if (std::abs(spearman(result.mean_mse, rbar_p)) < std::abs(result.corr_mse_rbar)) {
      ++exceed_rbar;
    }
    if (std::abs(spearman(result.mean_mse, ck_p)) < std::abs(result.corr_mse_ck)) {
      ++exceed_ck;
    }
  }
  result.perm_exceed_rbar = exceed_rbar;
  result.perm_exceed_ck = exceed_ck;

  CsvTable table;
  table.header = {"family", "n", "mean_mse", "median_mse", "std_mse"};
  for (std::size_t fi = 0; fi < n_fam; ++fi) {
    table.rows.push_back({result.families[fi], std::to_string(n), format17(result.mean_mse[fi]),
                          format17(result.median_mse[fi]), format17(result.std_mse[fi])});
  }
  result.csv_path = out_path(ctx, "e6_qrc_benchmark.csv");
  write_csv(result.csv_path, table);

  CsvTable corr;
  corr.header = {"pair", "spearman_rho", "null_shuffles_below"};
  corr.rows.push_back({"mse_vs_rbar", format17(result.corr_mse_rbar),
                       std::to_string(result.perm_exceed_rbar)});
  corr.rows.push_back(
      {"mse_vs_ck", format17(result.corr_mse_ck), std::to_string(result.perm_exceed_ck)});
  corr.rows.push_back({"mse_vs_var_ck", format17(result.corr_mse_var_ck), ""});
  result.correlation_csv_path = out_path(ctx, "e6_correlations.csv");
  write_csv(result.correlation_csv_path, corr);

  json extra;
  extra["reservoir_hash"] = own_hash;
  json rn = json::object();
  for (std::size_t fi = 0; fi < n_fam; ++fi) rn[result.families[fi]] = range_norm_mse[fi];
  extra["range_normalized_mean_mse"] = rn;
  extra["flagged_samples"] = dataset.flagged.size();
  write_metadata(ctx, "E6", result.csv_path, extra);
  write_metadata(ctx, "E6", result.correlation_csv_path, extra);
  return result;
}

}  // namespace kqr::experiments
