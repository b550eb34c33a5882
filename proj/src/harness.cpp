#include "surfcov/harness.hpp"

#include "surfcov/errors.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace surfcov {

using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read '" + p.string() + "'");
  return in;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json params_json(const ExplorerParams& p) {
  return {{"d_max", p.d_max},
          {"sigma", p.sigma},
          {"delta_check", p.delta_check},
          {"exterior_bias", p.exterior_bias},
          {"max_samples", p.max_samples},
          {"time_limit_s", p.time_limit_s},
          {"seed", p.seed}};
}

json summary_json(const RunResult& r) {
  json rejected = json::object();
  for (std::size_t k = 0; k < kRejectReasonCount; ++k) {
    rejected[to_string(static_cast<RejectReason>(k))] = r.rejected[k];
  }
  json series = json::array();
  for (const auto& s : r.series) series.push_back({s.iteration, s.elapsed_s, s.covered_cells});
  return {{"scenario", r.scenario},
          {"algorithm", to_string(r.algorithm)},
          {"seed", r.params.seed},
          {"params", params_json(r.params)},
          {"n_grid", r.coverage.n_grid()},
          {"iterations", r.iterations},
          {"accepted", r.accepted},
          {"rejected", rejected},
          {"covered_cells", r.coverage.covered_count()},
          {"structure_size", r.structure_size},
          {"charts", r.charts},
          {"wall_s", r.wall_s},
          {"samples_per_s", r.samples_per_s},
          {"accepted_per_s", r.accepted_per_s},
          {"series", series}};
}

}  // namespace

void write_series_csv(std::ostream& os, const std::vector<SeriesPoint>& series, bool timed) {
  os << "iteration,elapsed_s,covered_cells\n";
  for (const auto& s : series) {
    os << s.iteration << ',' << fixed(timed ? s.elapsed_s : 0.0, 6) << ',' << s.covered_cells << '\n';
  }
}

void write_run_artifacts(const RunResult& r, const fs::path& out_dir, bool timed_series) {
  fs::create_directories(out_dir);
  const int n = r.coverage.n_grid();
  {
    auto out = open_out(out_dir / "summary.json");
    out << summary_json(r).dump(2) << '\n';
  }
  {
    auto out = open_out(out_dir / "series.csv");
    write_series_csv(out, r.series, timed_series);
  }
  {
    auto out = open_out(out_dir / "visits.csv");
    write_matrix_csv(out, r.coverage.visit_matrix(), n);
  }
  {
    auto out = open_out(out_dir / "order.csv");
    write_matrix_csv(out, r.coverage.order_matrix(), n);
  }
  {
    auto out = open_out(out_dir / "visits.pgm", true);
    write_pgm16(out, r.coverage.visit_matrix(), n);
  }
  {
    auto out = open_out(out_dir / "order.pgm", true);
    write_pgm16(out, r.coverage.order_matrix(), n);
  }
}

RunResult cmd_explore(const Scenario& scenario, Algorithm algo, const ExplorerParams& params,
                      const fs::path& out_dir, bool timed_series) {
  RunResult r = run_exploration(algo, scenario, params);
  write_run_artifacts(r, out_dir, timed_series);
  return r;
}

BaselineSet cmd_baseline(const Scenario& scenario, std::uint64_t samples, std::uint64_t seed,
                         const fs::path& out_dir, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  BaselineSet b = exhaustive_baseline(scenario.system, scenario.world, scenario.n_grid, samples,
                                      seed, jobs);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "baseline.csv");
    write_baseline_csv(out, b);
  }
  {
    auto out = open_out(out_dir / "baseline.json");
    out << json{{"scenario", scenario.name},
                {"n_grid", b.n_grid},
                {"samples", b.sample_count},
                {"seed", seed},
                {"accepted", b.accepted_count},
                {"reachable_cells", b.reachable_count()},
                {"wall_s", wall}}
               .dump(2)
        << '\n';
  }
  return b;
}

Report cmd_report(const fs::path& run_dir, const fs::path& baseline_dir) {
  json summary;
  {
    auto in = open_in(run_dir / "summary.json");
    try {
      in >> summary;
    } catch (const json::exception& e) {
      throw ParseError("summary.json: " + std::string(e.what()));
    }
  }
  int n_run = 0;
  std::vector<std::uint64_t> visits;
  {
    auto in = open_in(run_dir / "visits.csv");
    visits = read_matrix_csv(in, &n_run);
  }
  BaselineSet baseline;
  {
    auto in = open_in(baseline_dir / "baseline.csv");
    baseline = read_baseline_csv(in);
  }
  if (n_run != baseline.n_grid) {
    throw ValidationError("grid size mismatch: run uses " + std::to_string(n_run) +
                          ", baseline uses " + std::to_string(baseline.n_grid));
  }
  Report rep;
  rep.coverage_pct = coverage_fraction(visits, baseline);
  rep.reachable_cells = baseline.reachable_count();
  for (std::size_t k = 0; k < visits.size(); ++k) {
    if (visits[k] > 0) {
      ++rep.covered_cells;
      if (baseline.reachable[k]) ++rep.covered_reachable;
    }
  }
  json out{{"coverage_pct", rep.coverage_pct},
           {"covered_cells", rep.covered_cells},
           {"covered_reachable_cells", rep.covered_reachable},
           {"reachable_cells", rep.reachable_cells},
           {"n_grid", n_run},
           {"scenario", summary.value("scenario", "")},
           {"algorithm", summary.value("algorithm", "")},
           {"seed", summary.value("seed", 0)},
           {"iterations", summary.value("iterations", 0)},
           {"accepted", summary.value("accepted", 0)},
           {"rejected", summary.value("rejected", json::object())},
           {"wall_s", summary.value("wall_s", 0.0)},
           {"samples_per_s", summary.value("samples_per_s", 0.0)},
           {"accepted_per_s", summary.value("accepted_per_s", 0.0)}};
  {
    auto f = open_out(run_dir / "report.json");
    f << out.dump(2) << '\n';
  }
  std::ostringstream line;
  line << out["scenario"].get<std::string>() << " [" << out["algorithm"].get<std::string>()
       << ", seed " << out["seed"] << "]: " << fixed(rep.coverage_pct, 2) << "% of "
       << rep.reachable_cells << " reachable cells covered, " << out["accepted"] << " accepted in "
       << fixed(out["wall_s"].get<double>(), 2) << " s";
  rep.summary_line = line.str();
  return rep;
}

void set_parameter(ExplorerParams& params, const std::string& name, double value) {
  if (name == "d_max") {
    params.d_max = value;
  } else if (name == "sigma" || name == "sigma_sample") {
    params.sigma = value;
  } else if (name == "delta_check" || name == "delta_q_check") {
    params.delta_check = value;
  } else if (name == "exterior_bias") {
    params.exterior_bias = value;
  } else {
    throw ValidationError("unknown sweep parameter '" + name +
                          "' (expected d_max, sigma, delta_check or exterior_bias)");
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "param_value,seed,coverage_pct,wall_s,samples,accepted\n";
  for (const auto& r : rows) {
    os << fixed(r.value, 6) << ',' << r.seed << ',' << fixed(r.coverage_pct, 4) << ','
       << fixed(r.wall_s, 6) << ',' << r.samples << ',' << r.accepted << '\n';
  }
}

std::vector<SweepRow> cmd_sweep(const Scenario& scenario, Algorithm algo, const std::string& param,
                                const std::vector<double>& values, int repeats, int jobs,
                                const ExplorerParams& base, const BaselineSet& baseline,
                                const fs::path& out_dir) {
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  if (baseline.n_grid != scenario.n_grid) {
    throw ValidationError("baseline grid size does not match the scenario");
  }
  struct Task {
    ExplorerParams params;
    double value;
  };
  std::vector<Task> tasks;
  for (double v : values) {
    for (int s = 1; s <= repeats; ++s) {
      ExplorerParams p = base;
      set_parameter(p, param, v);
      p.seed = static_cast<std::uint64_t>(s);
      p.validate();
      tasks.push_back({p, v});
    }
  }
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        const RunResult r = run_exploration(algo, scenario, tasks[k].params);
        rows[k] = {tasks[k].value, tasks[k].params.seed, coverage_fraction(r.coverage, baseline),
                   r.wall_s, r.iterations, r.accepted};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  fs::create_directories(out_dir);
  auto out = open_out(out_dir / "sweep.csv");
  write_sweep_csv(out, rows);
  return rows;
}

}  // namespace surfcov
