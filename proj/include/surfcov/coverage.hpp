#pragma once

#include "surfcov/collision.hpp"
#include "surfcov/constraint.hpp"
#include "surfcov/surfaces.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace surfcov {

struct CellIndex {
  int i = 0;  // u direction
  int j = 0;  // v direction
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Equally spaced n x n cell index; the upper domain edge clamps into the last cell.
CellIndex cell_index(const Domain& domain, int n_grid, double u, double v);

/// Row-major n x n matrix of counters; row = i (u), column = j (v).
class CoverageGrid {
 public:
  CoverageGrid(Domain domain, int n_grid);

  int n_grid() const { return n_; }
  const Domain& domain() const { return domain_; }

  /// `stamp` must be >= 1; 0 marks never-visited cells in first_visit().
  void record_visit(const ExtendedConfig& x, std::uint64_t stamp);
  void record_visit(CellIndex cell, std::uint64_t stamp);

  std::uint64_t visits(int i, int j) const { return visits_[idx(i, j)]; }
  std::uint64_t first_visit(int i, int j) const { return first_[idx(i, j)]; }
  const std::vector<std::uint64_t>& visit_matrix() const { return visits_; }
  const std::vector<std::uint64_t>& order_matrix() const { return first_; }

  std::vector<CellIndex> covered_cells() const;
  std::size_t covered_count() const { return covered_; }

  /// Adds another grid's visit counts; first-visit stamps keep the earlier one.
  void merge(const CoverageGrid& other);

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

  Domain domain_;
  int n_;
  std::vector<std::uint64_t> visits_;
  std::vector<std::uint64_t> first_;
  std::size_t covered_ = 0;
};

/// Cells reachable by at least one valid surface-constrained configuration, ignoring
/// connectivity.
struct BaselineSet {
  int n_grid = 0;
  std::vector<std::uint8_t> reachable;  // row-major, 0/1
  std::uint64_t sample_count = 0;
  std::uint64_t accepted_count = 0;

  bool at(int i, int j) const {
    return reachable[static_cast<std::size_t>(i) * n_grid + j] != 0;
  }
  std::size_t reachable_count() const;
};

/// Draws N (q, u, v) uniformly from the joint box times the domain, projects each, and
/// marks the cell of every valid projection whose tool axis points along the normal.
/// Chunked so the result depends only on (N, seed), not on `jobs`.
BaselineSet exhaustive_baseline(const ConstraintSystem& sys, const CollisionWorld& world,
                                int n_grid, std::uint64_t samples, std::uint64_t seed,
                                int jobs = 1);

/// Percentage of baseline-reachable cells that are covered. Throws UndefinedMetricError on
/// an empty baseline and ContractViolation on a size mismatch.
double coverage_fraction(const CoverageGrid& grid, const BaselineSet& baseline);
double coverage_fraction(const std::vector<std::uint64_t>& visits, const BaselineSet& baseline);

// Artifact export.
void write_matrix_csv(std::ostream& os, const std::vector<std::uint64_t>& m, int n);
std::vector<std::uint64_t> read_matrix_csv(std::istream& is, int* n_out);
/// Binary 16-bit PGM, values scaled so the maximum maps to 65535.
void write_pgm16(std::ostream& os, const std::vector<std::uint64_t>& m, int n);
void write_baseline_csv(std::ostream& os, const BaselineSet& baseline);
BaselineSet read_baseline_csv(std::istream& is);

}  // namespace surfcov
