#pragma once

#include "surfcov/coverage.hpp"
#include "surfcov/explorers.hpp"
#include "surfcov/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace surfcov {

namespace fs = std::filesystem;

/// Writes summary.json, series.csv, visits.csv, order.csv, visits.pgm and order.pgm.
/// series.csv carries measured elapsed seconds only when `timed_series` is set; otherwise the
/// column is 0 so that the file is reproducible byte for byte.
void write_run_artifacts(const RunResult& result, const fs::path& out_dir, bool timed_series = false);

RunResult cmd_explore(const Scenario& scenario, Algorithm algo, const ExplorerParams& params,
                      const fs::path& out_dir, bool timed_series = false);

/// Writes baseline.csv and baseline.json.
BaselineSet cmd_baseline(const Scenario& scenario, std::uint64_t samples, std::uint64_t seed,
                         const fs::path& out_dir, int jobs = 1);

struct Report {
  double coverage_pct = 0.0;
  std::size_t covered_cells = 0;
  std::size_t reachable_cells = 0;
  std::size_t covered_reachable = 0;
  std::string summary_line;
};

/// Reads a run directory and a baseline directory, writes <run_dir>/report.json.
Report cmd_report(const fs::path& run_dir, const fs::path& baseline_dir);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  double coverage_pct = 0.0;
  double wall_s = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t accepted = 0;
};

/// Accepted names: d_max, sigma (alias sigma_sample), delta_check, exterior_bias.
void set_parameter(ExplorerParams& params, const std::string& name, double value);

/// One run per (value, seed in 1..repeats), at most `jobs` at a time. Writes sweep.csv.
std::vector<SweepRow> cmd_sweep(const Scenario& scenario, Algorithm algo, const std::string& param,
                                const std::vector<double>& values, int repeats, int jobs,
                                const ExplorerParams& base, const BaselineSet& baseline,
                                const fs::path& out_dir);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& series, bool timed);

}  // namespace surfcov
