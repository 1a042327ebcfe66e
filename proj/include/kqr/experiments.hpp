#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kqr/types.hpp"

namespace kqr::experiments {

// Flat key=value configuration with typed accessors. Unknown keys are kept
// (they participate in the config hash) but otherwise ignored.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);
};

struct RunContext {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  bool full_scale = false;
  Config cfg;
};

// FNV-1a hash of the canonicalized (sorted key=value) configuration plus the
// experiment id and master seed. Output-path and thread-count settings do
// not participate: they must not change results.
std::string config_hash(const std::string& experiment, const RunContext& ctx);

struct E1Result {
  std::vector<int> ns;
  std::vector<double> median_ts;
  std::vector<int> excluded;
  double exponent = 0.0;
  double exponent_ci = 0.0;
  std::string csv_path;
};

struct E2Row {
  double hz;
  double rbar_h;
  double t_s;
  double t_h;
  double rbar_ts25, rbar_ts, rbar_th;
  int wrap_ts25, wrap_ts, wrap_th;  // branch-wrap detection flags
};

struct E2Result {
  std::vector<E2Row> rows;
  std::string csv_path;
};

struct E3Row {
  double hz;
  std::string source;  // "H", "Heff_ts25", "Heff_ts", "Heff_th"
  double ls_fraction;
  double var_a, var_b;
  double ck_mean, ck_var;
};

struct E3Result {
  std::vector<E3Row> rows;
  std::string csv_path;
};

struct E4Row {
  double k;
  int n_hilbert;
  double rbar;
  double var_a, var_b;
  double ck_mean, ck_var;
};

struct E4Result {
  std::vector<E4Row> rows;
  std::string csv_path;
};

struct E5Row {
  std::string family;
  int n;
  double var_a, var_b;
  double ck_over_dim;
  double var_ck_over_dim;
  double rbar;
  double mean_krylov_dim;
};

struct E5Result {
  std::vector<E5Row> rows;
  std::string csv_path;
};

struct E6Result {
  std::vector<std::string> families;
  std::vector<double> mean_mse, median_mse, std_mse;
  std::vector<double> family_rbar, family_ck_over_dim, family_var_ck;
  double corr_mse_rbar = 0.0;
  double corr_mse_ck = 0.0;
  double corr_mse_var_ck = 0.0;
  int perm_exceed_rbar = 0;  // how many of 100 label shuffles beat |rho|
  int perm_exceed_ck = 0;
  std::string csv_path;
  std::string correlation_csv_path;
};

E1Result run_e1_scrambling_scaling(const RunContext& ctx);
E2Result run_e2_rbar_heff(const RunContext& ctx);
E3Result run_e3_krylov_ising(const RunContext& ctx);
E4Result run_e4_standard_map(const RunContext& ctx);
E5Result run_e5_reservoir_krylov(const RunContext& ctx);
E6Result run_e6_qrc_benchmark(const RunContext& ctx);

// Statistics helpers shared by the experiments and their tests.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string format17(double v);

}  // namespace kqr::experiments
