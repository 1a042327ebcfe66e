#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kqr/experiments.hpp"
#include "kqr/plot.hpp"

using namespace kqr;
using namespace kqr::experiments;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunContext make_ctx(const std::string& out_subdir, const std::string& cfg_text,
                    std::uint64_t seed = 1, int threads = 1) {
  RunContext ctx;
  ctx.out_dir = "test_tmp/" + out_subdir;
  std::filesystem::remove_all(ctx.out_dir);
  ctx.seed = seed;
  ctx.threads = threads;
  ctx.cfg = Config::from_string(cfg_text);
  return ctx;
}

}  // namespace

TEST_CASE("config parsing handles comments, whitespace, and types") {
  Config cfg = Config::from_string(
      "# a comment line\n"
      "  n = 10  \n"
      "hz_grid = 0.1, 0.5 ,2.0\n"
      "label=plain\n"
      "\n"
      "ratio = 0.25 # trailing comment\n");
  CHECK(cfg.has("n"));
  CHECK(!cfg.has("missing"));
  CHECK(cfg.get_int("n", -1) == 10);
  CHECK(cfg.get_double("ratio", 0.0) == doctest::Approx(0.25));
  CHECK(cfg.get("label", "") == "plain");
  CHECK(cfg.get_int("absent", 7) == 7);
  std::vector<double> grid = cfg.get_list("hz_grid", {});
  REQUIRE(grid.size() == 3);
  CHECK(grid[1] == doctest::Approx(0.5));
  std::vector<double> fallback = cfg.get_list("absent", {1.0, 2.0});
  CHECK(fallback.size() == 2);
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK_THROWS_AS(Config::from_string("novalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(Config::from_string("= 3\n"), std::invalid_argument);
  Config cfg = Config::from_string("n = abc\nxs = 1,q,3\n");
  CHECK_THROWS_AS(cfg.get_int("n", 0), std::invalid_argument);
  CHECK_THROWS_AS(cfg.get_list("xs", {}), std::invalid_argument);
  CHECK_THROWS_AS(Config::from_file("no/such/file.cfg"), std::invalid_argument);
}

TEST_CASE("config hash ignores output settings but tracks everything else") {
  RunContext a;
  a.seed = 3;
  a.cfg = Config::from_string("n = 8\nout = /tmp/x\nthreads = 4\n");
  RunContext b;
  b.seed = 3;
  b.cfg = Config::from_string("threads = 9\nn = 8\nout = elsewhere\n");
  CHECK(config_hash("E2", a) == config_hash("E2", b));
  CHECK(config_hash("E2", a) != config_hash("E3", a));
  RunContext c = a;
  c.seed = 4;
  CHECK(config_hash("E2", a) != config_hash("E2", c));
  RunContext d = a;
  d.cfg.values["n"] = "10";
  CHECK(config_hash("E2", a) != config_hash("E2", d));
}

TEST_CASE("fit_line recovers exact lines and power laws") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> y = {5.0, 8.0, 11.0, 14.0};
  LineFit fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-10));

  // A cubic power law is an exact line in log-log coordinates.
  std::vector<double> lx, ly;
  for (double n : {6.0, 8.0, 10.0, 12.0}) {
    lx.push_back(std::log(n));
    ly.push_back(std::log(0.01 * n * n * n));
  }
  LineFit cubic = fit_line(lx, ly);
  CHECK(cubic.slope == doctest::Approx(3.0).epsilon(1e-12));

  std::vector<double> flat_x = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(fit_line(flat_x, x), std::invalid_argument);
}

TEST_CASE("spearman handles monotone data, reversals, and ties") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> up = {10.0, 20.0, 25.0, 90.0, 100.0};
  CHECK(spearman(x, up) == doctest::Approx(1.0).epsilon(1e-13));
  std::vector<double> down = {5.0, 4.0, 3.0, 2.0, 1.0};
  CHECK(spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-13));
  std::vector<double> tied_x = {1.0, 2.0, 2.0, 3.0};
  std::vector<double> tied_y = {10.0, 20.0, 20.0, 30.0};
  CHECK(spearman(tied_x, tied_y) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("pearson matches a hand-computed correlation") {
  std::vector<double> x = {0.0, 1.0, 2.0};
  std::vector<double> y = {0.0, 1.0, 4.0};
  // sxy = 4, sxx = 2, syy = 8.6667 -> rho = 4 / sqrt(17.3333) = 0.9608
  CHECK(pearson(x, y) == doctest::Approx(4.0 / std::sqrt(2.0 * 26.0 / 3.0)).epsilon(1e-12));
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("format17 round trips doubles exactly") {
  for (double v : {1.0 / 3.0, 2.718281828459045, -1e-17, 6.02214076e23}) {
    CHECK(std::stod(format17(v)) == v);
  }
}

TEST_CASE("experiment CSVs are byte-identical across reruns") {
  const std::string cfg = "k_grid = 0.5, 5\nn_grid = 64\nbank_count = 6\n";
  RunContext a = make_ctx("e4_a", cfg, 11);
  RunContext b = make_ctx("e4_b", cfg, 11);
  E4Result ra = run_e4_standard_map(a);
  E4Result rb = run_e4_standard_map(b);
  CHECK(slurp(ra.csv_path) == slurp(rb.csv_path));
  RunContext c = make_ctx("e4_c", cfg, 12);  // different seed hash in metadata
  E4Result rc = run_e4_standard_map(c);
  CHECK(slurp(ra.csv_path) == slurp(rc.csv_path));  // E4 draws nothing from the seed
}

TEST_CASE("reservoir statistics are independent of the thread count") {
  const std::string cfg = "families = G3,MG\nqubit_grid = 4\nn_circuits = 6\ndepth = 12\n";
  RunContext one = make_ctx("e5_t1", cfg, 21, 1);
  RunContext four = make_ctx("e5_t4", cfg, 21, 4);
  E5Result r1 = run_e5_reservoir_krylov(one);
  E5Result r4 = run_e5_reservoir_krylov(four);
  CHECK(slurp(r1.csv_path) == slurp(r4.csv_path));
}

TEST_CASE("metadata sidecars record the configuration hash") {
  const std::string cfg = "k_grid = 0.5\nn_grid = 32\nbank_count = 4\n";
  RunContext ctx = make_ctx("e4_meta", cfg, 2);
  E4Result r = run_e4_standard_map(ctx);
  std::string meta = slurp(r.csv_path + ".meta.json");
  CHECK(meta.find(config_hash("E4", ctx)) != std::string::npos);
  CHECK(meta.find("\"experiment\": \"E4\"") != std::string::npos);
}

TEST_CASE("short-time effective generators reproduce the exact spectrum statistics") {
  RunContext ctx = make_ctx("e2_limit", "n = 8\nhz_grid = 0.4\n", 1);
  E2Result r = run_e2_rbar_heff(ctx);
  REQUIRE(r.rows.size() == 1);
  const E2Row& row = r.rows[0];
  CHECK(std::abs(row.rbar_ts25 - row.rbar_h) < 1e-6);
  CHECK(row.wrap_ts25 == 0);
  CHECK(row.wrap_th == 1);  // the Heisenberg time always folds this spectrum
  CHECK(row.t_h > row.t_s);
}

TEST_CASE("reservoir benchmark refuses statistics from a mismatched run") {
  const std::string e5_cfg = "families = G1,G3\nqubit_grid = 4\nn_circuits = 4\ndepth = 15\n";
  RunContext e5_ctx = make_ctx("e6_source", e5_cfg, 5);
  E5Result e5 = run_e5_reservoir_krylov(e5_ctx);

  const std::string e6_base =
      "families = G1,G3\nn = 4\nn_circuits = 4\ndepth = 15\n"
      "n_samples = 30\nhz_lo = 0\nhz_hi = 2\n"
      "e5_csv = " + e5.csv_path + "\n";
  RunContext bad = make_ctx("e6_bad", e6_base, 6);  // different seed -> different circuits
  CHECK_THROWS_AS(run_e6_qrc_benchmark(bad), std::runtime_error);

  RunContext good = make_ctx("e6_good", e6_base, 5);
  E6Result r = run_e6_qrc_benchmark(good);
  REQUIRE(r.families.size() == 2);
  // The statistics columns must be lifted verbatim from the E5 table.
  CsvTable t = read_csv(e5.csv_path);
  int rb = t.column("rbar");
  REQUIRE(rb >= 0);
  CHECK(r.family_rbar[0] == std::stod(t.rows[0][static_cast<std::size_t>(rb)]));
  CHECK(r.family_rbar[1] == std::stod(t.rows[1][static_cast<std::size_t>(rb)]));
}

TEST_CASE("reservoir benchmark computes its own statistics when none are supplied") {
  const std::string cfg =
      "families = G1,G3\nn = 4\nn_circuits = 4\ndepth = 15\n"
      "n_samples = 30\nhz_lo = 0\nhz_hi = 2\n";
  RunContext ctx = make_ctx("e6_self", cfg, 5);
  E6Result r = run_e6_qrc_benchmark(ctx);
  REQUIRE(r.families.size() == 2);
  CHECK(r.mean_mse[0] > 0.0);
  CHECK(r.mean_mse[1] > 0.0);
  // Same seed as the paired test above: identical statistics either way.
  const std::string e5_cfg = "families = G1,G3\nqubit_grid = 4\nn_circuits = 4\ndepth = 15\n";
  RunContext e5_ctx = make_ctx("e6_self_ref", e5_cfg, 5);
  E5Result e5 = run_e5_reservoir_krylov(e5_ctx);
  CsvTable t = read_csv(e5.csv_path);
  int rb = t.column("rbar");
  CHECK(r.family_rbar[0] == std::stod(t.rows[0][static_cast<std::size_t>(rb)]));
  CHECK(r.family_rbar[1] == std::stod(t.rows[1][static_cast<std::size_t>(rb)]));
}

TEST_CASE("plot rendering matches the golden SVG byte for byte") {
  const std::string dir = KQR_TEST_DATA_DIR;
  PlotSpec spec = plot_spec_from_file(dir + "/plot_fixture.spec");
  std::filesystem::create_directories("test_tmp");
  const std::string out = "test_tmp/plot_fixture_out.svg";
  emit_plot(dir + "/plot_fixture.csv", spec, out);
  CHECK(slurp(out) == slurp(dir + "/plot_fixture.svg"));
}

TEST_CASE("plot rendering rejects missing columns before writing") {
  const std::string dir = KQR_TEST_DATA_DIR;
  PlotSpec spec = plot_spec_from_file(dir + "/plot_fixture.spec");
  spec.y_columns = {"no_such_column"};
  const std::string out = "test_tmp/should_not_exist.svg";
  std::filesystem::remove(out);
  CHECK_THROWS_AS(emit_plot(dir + "/plot_fixture.csv", spec, out), std::invalid_argument);
  CHECK(!std::filesystem::exists(out));
}
