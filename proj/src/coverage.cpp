#include "surfcov/coverage.hpp"

#include "surfcov/atlas.hpp"
#include "surfcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace surfcov {

CellIndex cell_index(const Domain& domain, int n_grid, double u, double v) {
  if (!domain.contains(u, v)) {
    throw ContractViolation("cell_index called with (u, v) outside the domain");
  }
  auto axis = [n_grid](double x, double lo, double hi) {
    const int k = static_cast<int>(std::floor((x - lo) / (hi - lo) * n_grid));
    return std::clamp(k, 0, n_grid - 1);
  };
  return {axis(u, domain.u_min, domain.u_max), axis(v, domain.v_min, domain.v_max)};
}

CoverageGrid::CoverageGrid(Domain domain, int n_grid)
    : domain_(domain),
      n_(n_grid),
      visits_(static_cast<std::size_t>(n_grid) * n_grid, 0),
      first_(static_cast<std::size_t>(n_grid) * n_grid, 0) {
  if (n_grid < 1) throw ValidationError("grid resolution must be positive");
}

void CoverageGrid::record_visit(const ExtendedConfig& x, std::uint64_t stamp) {
  record_visit(cell_index(domain_, n_, x.u(), x.v()), stamp);
}

void CoverageGrid::record_visit(CellIndex cell, std::uint64_t stamp) {
  if (stamp == 0) throw ContractViolation("visit stamps start at 1");
  const auto k = idx(cell.i, cell.j);
  if (visits_[k]++ == 0) {
    first_[k] = stamp;
    ++covered_;
  }
}

std::vector<CellIndex> CoverageGrid::covered_cells() const {
  std::vector<CellIndex> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (visits(i, j) >= 1) out.push_back({i, j});
    }
  }
  return out;
}

void CoverageGrid::merge(const CoverageGrid& other) {
  if (other.n_ != n_) throw ContractViolation("cannot merge grids of different resolution");
  covered_ = 0;
  for (std::size_t k = 0; k < visits_.size(); ++k) {
    if (other.visits_[k] > 0) {
      first_[k] = visits_[k] > 0 ? std::min(first_[k], other.first_[k]) : other.first_[k];
    }
    visits_[k] += other.visits_[k];
    if (visits_[k] > 0) ++covered_;
  }
}

std::size_t BaselineSet::reachable_count() const {
  return static_cast<std::size_t>(std::count(reachable.begin(), reachable.end(), 1));
}

namespace {

constexpr std::uint64_t kBaselineChunk = 1 << 16;

void baseline_chunk(const ConstraintSystem& sys, const CollisionWorld& world, int n_grid,
                    std::uint64_t count, std::uint64_t seed, std::uint64_t chunk,
                    std::vector<std::uint8_t>& marks, std::uint64_t& accepted) {
  std::seed_seq seq{seed, chunk, std::uint64_t{0x5eed}};
  Rng rng(seq);
  const auto& robot = sys.robot();
  const auto& dom = sys.surface().domain();
  std::vector<std::uniform_real_distribution<double>> joint;
  for (const auto& l : robot.limits()) joint.emplace_back(l.lo, l.hi);
  std::uniform_real_distribution<double> du(dom.u_min, dom.u_max);
  std::uniform_real_distribution<double> dv(dom.v_min, dom.v_max);
  VecX q(robot.dof());
  for (std::uint64_t s = 0; s < count; ++s) {
    for (int i = 0; i < robot.dof(); ++i) q[i] = joint[static_cast<std::size_t>(i)](rng);
    const double u = du(rng);
    const double v = dv(rng);
    ExtendedConfig x;
    try {
      x = sys.project(ExtendedConfig(q, u, v));
      if (!state_valid(sys, world, x)) continue;
      if (sys.alignment_sign(x) != 1) continue;
    } catch (const Error&) {
      continue;
    }
    const auto c = cell_index(dom, n_grid, x.u(), x.v());
    marks[static_cast<std::size_t>(c.i) * n_grid + c.j] = 1;
    ++accepted;
  }
}

}  // namespace

BaselineSet exhaustive_baseline(const ConstraintSystem& sys, const CollisionWorld& world,
                                int n_grid, std::uint64_t samples, std::uint64_t seed, int jobs) {
  if (n_grid < 1) throw ValidationError("grid resolution must be positive");
  BaselineSet out;
  out.n_grid = n_grid;
  out.sample_count = samples;
  out.reachable.assign(static_cast<std::size_t>(n_grid) * n_grid, 0);
  const std::uint64_t chunks = (samples + kBaselineChunk - 1) / kBaselineChunk;
  std::vector<std::vector<std::uint8_t>> marks(chunks, out.reachable);
  std::vector<std::uint64_t> accepted(chunks, 0);
  auto run = [&](std::uint64_t c) {
    const std::uint64_t count = std::min(kBaselineChunk, samples - c * kBaselineChunk);
    baseline_chunk(sys, world, n_grid, count, seed, c, marks[c], accepted[c]);
  };
  const auto workers = static_cast<std::uint64_t>(std::max(1, jobs));
  if (workers == 1 || chunks <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run(c);
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < std::min(workers, chunks); ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < chunks; c += workers) run(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::uint64_t c = 0; c < chunks; ++c) {
    for (std::size_t k = 0; k < out.reachable.size(); ++k) out.reachable[k] |= marks[c][k];
    out.accepted_count += accepted[c];
  }
  return out;
}

double coverage_fraction(const std::vector<std::uint64_t>& visits, const BaselineSet& baseline) {
  if (visits.size() != baseline.reachable.size()) {
    throw ContractViolation("coverage grid and baseline have different resolutions");
  }
  std::size_t reachable = 0, hit = 0;
  for (std::size_t k = 0; k < visits.size(); ++k) {
    if (!baseline.reachable[k]) continue;
    ++reachable;
    if (visits[k] > 0) ++hit;
  }
  if (reachable == 0) throw UndefinedMetricError("baseline has no reachable cells");
  return 100.0 * static_cast<double>(hit) / static_cast<double>(reachable);
}

double coverage_fraction(const CoverageGrid& grid, const BaselineSet& baseline) {
  if (grid.n_grid() != baseline.n_grid) {
    throw ContractViolation("coverage grid and baseline have different resolutions");
  }
  return coverage_fraction(grid.visit_matrix(), baseline);
}

void write_matrix_csv(std::ostream& os, const std::vector<std::uint64_t>& m, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) os << ',';
      os << m[static_cast<std::size_t>(i) * n + j];
    }
    os << '\n';
  }
}

std::vector<std::uint64_t> read_matrix_csv(std::istream& is, int* n_out) {
  std::vector<std::uint64_t> values;
  std::string line;
  int rows = 0;
  std::size_t cols = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stoull(cell));
      } catch (const std::exception&) {
        throw ParseError("matrix CSV row " + std::to_string(rows + 1) + ": bad value '" + cell + "'");
      }
      ++c;
    }
    if (rows == 0) cols = c;
    if (c != cols) throw ParseError("matrix CSV row " + std::to_string(rows + 1) + " has wrong length");
    ++rows;
  }
  if (static_cast<std::size_t>(rows) != cols) throw ParseError("matrix CSV is not square");
  if (n_out) *n_out = rows;
  return values;
}

void write_pgm16(std::ostream& os, const std::vector<std::uint64_t>& m, int n) {
  const std::uint64_t peak = m.empty() ? 0 : *std::max_element(m.begin(), m.end());
  os << "P5\n" << n << ' ' << n << "\n65535\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::uint64_t raw = m[static_cast<std::size_t>(i) * n + j];
      const auto val = static_cast<std::uint16_t>(
          peak == 0 ? 0 : std::llround(65535.0 * static_cast<double>(raw) / static_cast<double>(peak)));
      os.put(static_cast<char>(val >> 8));
      os.put(static_cast<char>(val & 0xff));
    }
  }
}

void write_baseline_csv(std::ostream& os, const BaselineSet& baseline) {
  std::vector<std::uint64_t> m(baseline.reachable.begin(), baseline.reachable.end());
  write_matrix_csv(os, m, baseline.n_grid);
}

BaselineSet read_baseline_csv(std::istream& is) {
  BaselineSet b;
  const auto m = read_matrix_csv(is, &b.n_grid);
  b.reachable.reserve(m.size());
  for (auto x : m) {
    if (x > 1) throw ParseError("baseline CSV must contain only 0/1");
    b.reachable.push_back(static_cast<std::uint8_t>(x));
  }
  return b;
}

}  // namespace surfcov
