#pragma once

#include "surfcov/atlas.hpp"
#include "surfcov/coverage.hpp"
#include "surfcov/scenario.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace surfcov {

enum class RejectReason { SampleFailure = 0, InvalidState = 1, TransitionFailure = 2 };
inline constexpr std::size_t kRejectReasonCount = 3;
const char* to_string(RejectReason r);

struct StepResult {
  bool accepted = false;
  RejectReason reason = RejectReason::SampleFailure;  // meaningful when !accepted
  std::size_t index = 0;                              // new state index when accepted
};

/// An accepted state and the state it was reached from (-1 for the root).
struct RecordedState {
  ExtendedConfig state;
  std::int64_t parent = -1;
  std::uint64_t iteration = 0;
};

/// Exact Euclidean nearest neighbour over an insert-only k-d tree. Ties go to the lowest index.
class NearestNeighborIndex {
 public:
  explicit NearestNeighborIndex(int dim) : dim_(dim) {}

  void insert(const VecX& p);
  std::size_t size() const { return nodes_.size(); }
  /// (index, distance); requires size() > 0.
  std::pair<std::size_t, double> nearest(const VecX& query) const;

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int axis = 0;
  };
  const double* point(std::size_t i) const { return data_.data() + i * static_cast<std::size_t>(dim_); }

  int dim_;
  std::vector<double> data_;
  std::vector<Node> nodes_;
};

class ExplorationTree {
 public:
  explicit ExplorationTree(ExtendedConfig root);

  std::size_t add_child(ExtendedConfig state, std::size_t parent, std::uint64_t iteration);
  std::pair<std::size_t, double> nearest(const ExtendedConfig& x) const;
  const std::vector<RecordedState>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<RecordedState> nodes_;
  NearestNeighborIndex index_;
};

/// Projects (q0, closest surface point of f_pos(q0)) onto the manifold. The result must be
/// valid and have the tool axis along the surface normal; otherwise InitializationError.
ExtendedConfig init_root(const ConstraintSystem& sys, const CollisionWorld& world, const VecX& q0);

/// RRT over the manifold with uniform sampling of the atlas' charts.
class RrtExplorer {
 public:
  RrtExplorer(const Scenario& scenario, const ExplorerParams& params);

  StepResult step();

  const ExplorationTree& tree() const { return tree_; }
  const Atlas& atlas() const { return atlas_; }
  const CoverageGrid& coverage() const { return coverage_; }
  std::uint64_t iteration() const { return iteration_; }

 private:
  const Scenario* scenario_;
  ExplorerParams params_;
  Rng rng_;
  Atlas atlas_;
  ExplorationTree tree_;
  CoverageGrid coverage_;
  ValidityFn valid_;
  std::uint64_t iteration_ = 0;
};

/// Importance of a grid cell:
///   log(first_iteration) * score / (max(expansions, 1) * (1 + neighbors) * coverage)
double importance(std::uint64_t first_iteration, double score, std::uint64_t expansions,
                  int neighbors, std::uint64_t coverage);

/// Surface-coordinate projection grid used to bias expansion towards the frontier.
class BiasGrid {
 public:
  static constexpr std::size_t kStateCap = 256;
  static constexpr double kScoreFloor = 1e-4;

  struct Cell {
    CellIndex index;
    std::vector<std::size_t> states;  // indices into the explorer's state store (reservoir)
    std::uint64_t first_iteration = 0;
    double score = 1.0;
    std::uint64_t expansions = 0;
    std::uint64_t coverage = 0;  // states that ever landed here
    int neighbors = 0;
    bool interior = false;

    double importance() const {
      return surfcov::importance(first_iteration, score, expansions, neighbors, coverage);
    }
  };

  struct Selection {
    std::size_t cell = 0;   // position in cells()
    std::size_t state = 0;  // state store index
    bool exterior_set = false;
  };

  BiasGrid(Domain domain, int n_grid, double exterior_bias);

  /// Adds a state to the cell containing (u, v). Returns true when the cell is new.
  bool add(std::size_t state_index, double u, double v, std::uint64_t first_iteration, Rng& rng);
  Selection select(Rng& rng) const;
  void penalize(std::size_t cell);
  void count_expansion(std::size_t cell) { ++cells_[cell].expansions; }

  const std::vector<Cell>& cells() const { return cells_; }
  std::optional<std::size_t> find(CellIndex c) const;
  int n_grid() const { return n_; }
  std::size_t exterior_count() const;

 private:
  void refresh(std::size_t cell);

  Domain domain_;
  int n_;
  double exterior_bias_;
  std::vector<Cell> cells_;
  std::vector<int> lookup_;  // n*n -> position in cells_, or -1
};

/// Grid-biased exploration: pick a promising cell, sample a Gaussian around one of its
/// states, and keep the sample if the transition to it is valid.
class BiasedExplorer {
 public:
  BiasedExplorer(const Scenario& scenario, const ExplorerParams& params);

  StepResult step();

  const std::vector<RecordedState>& states() const { return states_; }
  const BiasGrid& grid() const { return grid_; }
  const Atlas& atlas() const { return atlas_; }
  const CoverageGrid& coverage() const { return coverage_; }
  std::uint64_t iteration() const { return iteration_; }

 private:
  StepResult reject(std::size_t cell, RejectReason reason);

  const Scenario* scenario_;
  ExplorerParams params_;
  Rng rng_;
  Atlas atlas_;
  std::vector<RecordedState> states_;
  BiasGrid grid_;
  CoverageGrid coverage_;
  ValidityFn valid_;
  std::uint64_t iteration_ = 0;
};

enum class Algorithm { Rrt, Biased };
const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct SeriesPoint {
  std::uint64_t iteration = 0;
  double elapsed_s = 0.0;
  std::size_t covered_cells = 0;
};

struct RunResult {
  std::string scenario;
  Algorithm algorithm = Algorithm::Biased;
  ExplorerParams params;
  std::uint64_t iterations = 0;
  std::uint64_t accepted = 0;
  std::array<std::uint64_t, kRejectReasonCount> rejected{};
  double wall_s = 0.0;
  double samples_per_s = 0.0;
  double accepted_per_s = 0.0;
  std::vector<SeriesPoint> series;
  CoverageGrid coverage;
  std::size_t structure_size = 0;  // tree nodes or grid cells
  std::size_t charts = 0;
  std::vector<RecordedState> states;  // filled when requested
};

RunResult run_rrt(const Scenario& scenario, const ExplorerParams& params, bool keep_states = false);
RunResult run_biased(const Scenario& scenario, const ExplorerParams& params,
                     bool keep_states = false);
RunResult run_exploration(Algorithm algo, const Scenario& scenario, const ExplorerParams& params,
                          bool keep_states = false);

}  // namespace surfcov
