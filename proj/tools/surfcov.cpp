// Command-line front end: explore, baseline, report, sweep.
#include "surfcov/errors.hpp"
#include "surfcov/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace surfcov;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string tok = text.substr(start, comma - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size()) throw ValidationError("bad value '" + tok + "' in --values");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous surface-coverage estimation for robot arms"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, algo_name = "biased";
  std::uint64_t samples = 25000, seed = 0;
  double time_limit = 0.0;
  std::optional<double> d_max, sigma, delta_check, exterior_bias;
  bool timed_series = false;

  auto* explore = app.add_subcommand("explore", "run one exploration and write its artifacts");
  explore->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  explore->add_option("--algo", algo_name, "rrt or biased")->required()->check(CLI::IsMember({"rrt", "biased"}));
  explore->add_option("--samples", samples, "sample budget")->required();
  explore->add_option("--time-limit", time_limit, "wall-clock limit in seconds (0 = none)");
  explore->add_option("--seed", seed, "random seed")->required();
  explore->add_option("--d-max", d_max, "RRT extension distance");
  explore->add_option("--sigma", sigma, "Gaussian sampling std");
  explore->add_option("--delta-check", delta_check, "transition check step");
  explore->add_option("--exterior-bias", exterior_bias, "exterior cell selection probability");
  explore->add_flag("--timed-series", timed_series, "write measured elapsed_s to series.csv");
  explore->add_option("--out", out_dir, "output directory")->required();

  int jobs = 1;
  auto* baseline = app.add_subcommand("baseline", "estimate the reachable cells by random projection");
  baseline->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  baseline->add_option("--samples", samples, "number of random configurations")->required();
  baseline->add_option("--seed", seed, "random seed")->required();
  baseline->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  baseline->add_option("--out", out_dir, "output directory")->required();

  std::string run_dir, baseline_dir;
  auto* report = app.add_subcommand("report", "compare a run against a baseline");
  report->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--baseline", baseline_dir, "baseline directory")->required()->check(CLI::ExistingDirectory);

  std::string param, values_text;
  int repeats = 1;
  std::uint64_t baseline_samples = 200000;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep over seeds 1..repeats");
  sweep->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--algo", algo_name, "rrt or biased")->required()->check(CLI::IsMember({"rrt", "biased"}));
  sweep->add_option("--param", param, "d_max, sigma, delta_check or exterior_bias")->required();
  sweep->add_option("--values", values_text, "comma-separated values")->required();
  sweep->add_option("--repeats", repeats, "seeds per value")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--samples", samples, "sample budget per run");
  sweep->add_option("--time-limit", time_limit, "wall-clock limit per run in seconds");
  sweep->add_option("--baseline", baseline_dir, "baseline directory (computed when omitted)");
  sweep->add_option("--baseline-samples", baseline_samples, "samples for a computed baseline");
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*explore) {
      auto sc = parse_scenario(scenario_path);
      ExplorerParams p = sc->defaults;
      p.max_samples = samples;
      p.time_limit_s = time_limit;
      p.seed = seed;
      if (d_max) p.d_max = *d_max;
      if (sigma) p.sigma = *sigma;
      if (delta_check) p.delta_check = *delta_check;
      if (exterior_bias) p.exterior_bias = *exterior_bias;
      p.validate();
      const RunResult r = cmd_explore(*sc, parse_algorithm(algo_name), p, out_dir, timed_series);
      std::cout << sc->name << " [" << algo_name << ", seed " << seed << "]: " << r.accepted
                << " accepted of " << r.iterations << " samples, " << r.coverage.covered_count()
                << " cells covered\n";
    } else if (*baseline) {
      auto sc = parse_scenario(scenario_path);
      const BaselineSet b = cmd_baseline(*sc, samples, seed, out_dir, jobs);
      std::cout << sc->name << ": " << b.reachable_count() << " of " << b.n_grid * b.n_grid
                << " cells reachable (" << b.accepted_count << " of " << b.sample_count
                << " samples accepted)\n";
    } else if (*report) {
      std::cout << cmd_report(run_dir, baseline_dir).summary_line << '\n';
    } else if (*sweep) {
      auto sc = parse_scenario(scenario_path);
      ExplorerParams p = sc->defaults;
      p.max_samples = samples;
      p.time_limit_s = time_limit;
      BaselineSet b;
      if (baseline_dir.empty()) {
        b = cmd_baseline(*sc, baseline_samples, 1, std::filesystem::path(out_dir) / "baseline", jobs);
      } else {
        std::ifstream in(std::filesystem::path(baseline_dir) / "baseline.csv");
        if (!in) throw Error("cannot read baseline.csv in '" + baseline_dir + "'");
        b = read_baseline_csv(in);
      }
      const auto rows = cmd_sweep(*sc, parse_algorithm(algo_name), param, parse_values(values_text),
                                  repeats, jobs, p, b, out_dir);
      std::cout << rows.size() << " runs written to " << (std::filesystem::path(out_dir) / "sweep.csv").string()
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
