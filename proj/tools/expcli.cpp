#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "kqr/experiments.hpp"
#include "kqr/plot.hpp"

namespace {

namespace ke = kqr::experiments;

int run_experiment(const std::string& experiment, const ke::RunContext& ctx) {
  if (experiment == "E1") {
    ke::E1Result r = ke::run_e1_scrambling_scaling(ctx);
    std::cout << "E1: exponent " << ke::format17(r.exponent) << " +/- "
              << ke::format17(r.exponent_ci) << "\n";
    std::cout << "wrote " << r.csv_path << "\n";
  } else if (experiment == "E2") {
    ke::E2Result r = ke::run_e2_rbar_heff(ctx);
    std::cout << "E2: " << r.rows.size() << " grid points\n";
    std::cout << "wrote " << r.csv_path << "\n";
  } else if (experiment == "E3") {
    ke::E3Result r = ke::run_e3_krylov_ising(ctx);
    std::cout << "E3: " << r.rows.size() << " rows\n";
    std::cout << "wrote " << r.csv_path << "\n";
  } else if (experiment == "E4") {
    ke::E4Result r = ke::run_e4_standard_map(ctx);
    std::cout << "E4: " << r.rows.size() << " rows\n";
    std::cout << "wrote " << r.csv_path << "\n";
  } else if (experiment == "E5") {
    ke::E5Result r = ke::run_e5_reservoir_krylov(ctx);
    std::cout << "E5: " << r.rows.size() << " family rows\n";
    std::cout << "wrote " << r.csv_path << "\n";
  } else if (experiment == "E6") {
    ke::E6Result r = ke::run_e6_qrc_benchmark(ctx);
    std::cout << "E6: spearman(mse, rbar) = " << ke::format17(r.corr_mse_rbar)
              << ", spearman(mse, ck) = " << ke::format17(r.corr_mse_ck) << "\n";
    std::cout << "wrote " << r.csv_path << "\n";
    std::cout << "wrote " << r.correlation_csv_path << "\n";
  } else {
    std::cerr << "unknown experiment: " << experiment << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov-complexity experiments over spin chains, maps, and circuit reservoirs"};
  app.require_subcommand(1);

  std::string experiment, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  bool full_scale = false;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write its CSV outputs");
  run->add_option("experiment", experiment, "One of E1..E6")
      ->required()
      ->check(CLI::IsMember({"E1", "E2", "E3", "E4", "E5", "E6"}));
  run->add_option("--config", config_path, "Path to a key=value config file")->required();
  run->add_option("--out", out_dir, "Output directory (default: current directory)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Master seed (overrides config)");
  run->add_option("--threads", threads, "Worker threads (results do not depend on this)");
  run->add_flag("--full-scale", full_scale, "Use the full-size grids instead of desk-scale");

  std::string csv_path, spec_path, svg_path;
  CLI::App* plot = app.add_subcommand("plot", "Render a CSV column plot to SVG");
  plot->add_option("--csv", csv_path, "Input CSV file")->required();
  plot->add_option("--spec", spec_path, "Plot spec (key=value: x, y, title, markers, logx, logy)")
      ->required();
  plot->add_option("--out", svg_path, "Output SVG path (default: CSV path with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      ke::RunContext ctx;
      ctx.cfg = ke::Config::from_file(config_path);
      ctx.out_dir = out_dir;
      ctx.threads = threads;
      ctx.full_scale = full_scale;
      if (seed_opt->count() > 0) {
        ctx.seed = seed;
      } else {
        ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed", 1));
      }
      return run_experiment(experiment, ctx);
    }
    if (plot->parsed()) {
      kqr::PlotSpec spec = kqr::plot_spec_from_file(spec_path);
      std::string out = svg_path;
      if (out.empty()) {
        out = csv_path;
        auto dot = out.rfind('.');
        if (dot != std::string::npos) out = out.substr(0, dot);
        out += ".svg";
      }
      kqr::emit_plot(csv_path, spec, out);
      std::cout << "wrote " << out << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
