#include "surfcov/explorers.hpp"

#include "surfcov/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace surfcov {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::SampleFailure:
      return "sample_failure";
    case RejectReason::InvalidState:
      return "invalid_state";
    case RejectReason::TransitionFailure:
      return "transition_failure";
  }
  return "unknown";
}

const char* to_string(Algorithm a) { return a == Algorithm::Rrt ? "rrt" : "biased"; }

Algorithm parse_algorithm(const std::string& s) {
  if (s == "rrt") return Algorithm::Rrt;
  if (s == "biased") return Algorithm::Biased;
  throw ValidationError("unknown algorithm '" + s + "' (expected rrt or biased)");
}

// ---------------------------------------------------------------------------------------------
// Nearest neighbours

void NearestNeighborIndex::insert(const VecX& p) {
  if (p.size() != dim_) throw ContractViolation("nearest-neighbour point has wrong dimension");
  const std::size_t id = nodes_.size();
  data_.insert(data_.end(), p.data(), p.data() + dim_);
  nodes_.push_back({});
  if (id == 0) return;
  std::size_t cur = 0;
  int depth = 0;
  while (true) {
    Node& n = nodes_[cur];
    const int axis = n.axis;
    const bool go_left = p[axis] < point(cur)[axis];
    int& child = go_left ? n.left : n.right;
    ++depth;
    if (child < 0) {
      child = static_cast<int>(id);
      nodes_[id].axis = depth % dim_;
      return;
    }
    cur = static_cast<std::size_t>(child);
  }
}

std::pair<std::size_t, double> NearestNeighborIndex::nearest(const VecX& query) const {
  if (nodes_.empty()) throw ContractViolation("nearest neighbour query on an empty index");
  if (query.size() != dim_) throw ContractViolation("nearest-neighbour query has wrong dimension");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  struct Pending {
    int node;
    double bound;  // squared distance lower bound
  };
  std::vector<Pending> stack;
  stack.reserve(64);
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Pending top = stack.back();
    stack.pop_back();
    if (top.bound > best_d2) continue;
    const auto id = static_cast<std::size_t>(top.node);
    const double* pt = point(id);
    double d2 = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double diff = query[k] - pt[k];
      d2 += diff * diff;
    }
    if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
      best_d2 = d2;
      best = id;
    }
    const Node& n = nodes_[id];
    const double diff = query[n.axis] - pt[n.axis];
    const int near = diff < 0 ? n.left : n.right;
    const int far = diff < 0 ? n.right : n.left;
    if (far >= 0) stack.push_back({far, diff * diff});
    if (near >= 0) stack.push_back({near, 0.0});
  }
  return {best, std::sqrt(best_d2)};
}

ExplorationTree::ExplorationTree(ExtendedConfig root)
    : index_(static_cast<int>(root.coords().size())) {
  index_.insert(root.coords());
  nodes_.push_back({std::move(root), -1, 0});
}

std::size_t ExplorationTree::add_child(ExtendedConfig state, std::size_t parent,
                                       std::uint64_t iteration) {
  if (parent >= nodes_.size()) throw ContractViolation("parent index out of range");
  index_.insert(state.coords());
  nodes_.push_back({std::move(state), static_cast<std::int64_t>(parent), iteration});
  return nodes_.size() - 1;
}

std::pair<std::size_t, double> ExplorationTree::nearest(const ExtendedConfig& x) const {
  return index_.nearest(x.coords());
}

// ---------------------------------------------------------------------------------------------
// Initialization

ExtendedConfig init_root(const ConstraintSystem& sys, const CollisionWorld& world, const VecX& q0) {
  if (!within_limits(sys.robot(), q0)) {
    throw InitializationError("start configuration violates the joint limits");
  }
  const auto uv = sys.surface().closest_point(fk_pose(sys.robot(), q0).position);
  ExtendedConfig root;
  try {
    root = sys.project(ExtendedConfig(q0, uv.u, uv.v));
  } catch (const Error& e) {
    throw InitializationError(std::string("projecting the start configuration failed: ") + e.what());
  }
  if (!within_limits(sys.robot(), root.q())) {
    throw InitializationError("projected start configuration violates the joint limits");
  }
  if (!sys.surface().in_domain(root.u(), root.v())) {
    throw InitializationError("projected start configuration lies outside the surface domain");
  }
  if (config_in_collision(world, sys.robot(), root.q())) {
    throw InitializationError("projected start configuration is in collision");
  }
  int sign = 0;
  try {
    sign = sys.alignment_sign(root);
  } catch (const Error& e) {
    throw InitializationError(e.what());
  }
  if (sign != 1) {
    throw InitializationError("projected start configuration has the tool axis against the normal");
  }
  return root;
}

namespace {

ValidityFn make_validity(const Scenario& s) {
  return [sys = &s.system, world = &s.world](const ExtendedConfig& x) {
    return state_valid(*sys, *world, x);
  };
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// RRT

RrtExplorer::RrtExplorer(const Scenario& scenario, const ExplorerParams& params)
    : scenario_(&scenario),
      params_(params),
      rng_(params.seed),
      atlas_(scenario.system, scenario.atlas),
      tree_([&] {
        ExtendedConfig root = init_root(scenario.system, scenario.world, scenario.q0);
        root.chart = 0;
        return root;
      }()),
      coverage_(scenario.surface().domain(), scenario.n_grid),
      valid_(make_validity(scenario)) {
  params_.validate();
  const ExtendedConfig& root = tree_.nodes().front().state;
  atlas_.create_chart(root);
  coverage_.record_visit(root, 1);
}

StepResult RrtExplorer::step() {
  ++iteration_;
  const auto& sys = scenario_->system;
  ExtendedConfig target;
  try {
    target = atlas_.sample_uniform(rng_);
  } catch (const SampleFailure&) {
    return {false, RejectReason::SampleFailure, 0};
  }
  if (!valid_(target)) return {false, RejectReason::InvalidState, 0};

  const auto [near_idx, dist] = tree_.nearest(target);
  const ExtendedConfig& near = tree_.nodes()[near_idx].state;
  if (dist > params_.d_max) {
    const auto path = walk_geodesic(sys, atlas_.params(), near, target, atlas_.params().geodesic_step);
    if (!path) return {false, RejectReason::TransitionFailure, 0};
    try {
      // Clamp by arc length so the chord to the new state never exceeds d_max.
      target = interpolate_along(sys, *path, std::min(1.0, params_.d_max / path->length()));
    } catch (const InterpolationFailure&) {
      return {false, RejectReason::TransitionFailure, 0};
    }
  }
  if (!check_transition(sys, atlas_.params(), near, target, params_.delta_check, valid_)) {
    return {false, RejectReason::TransitionFailure, 0};
  }
  target.chart = near.chart;
  try {
    atlas_.assign_chart(target);
  } catch (const SingularityError&) {
    return {false, RejectReason::SampleFailure, 0};
  }
  coverage_.record_visit(target, iteration_ + 1);
  const auto idx = tree_.add_child(std::move(target), near_idx, iteration_);
  return {true, RejectReason::SampleFailure, idx};
}

// ---------------------------------------------------------------------------------------------
// Biased grid

double importance(std::uint64_t first_iteration, double score, std::uint64_t expansions,
                  int neighbors, std::uint64_t coverage) {
  const double s = static_cast<double>(std::max<std::uint64_t>(expansions, 1));
  return std::log(static_cast<double>(first_iteration)) * score /
         (s * (1.0 + neighbors) * static_cast<double>(coverage));
}

BiasGrid::BiasGrid(Domain domain, int n_grid, double exterior_bias)
    : domain_(domain),
      n_(n_grid),
      exterior_bias_(exterior_bias),
      lookup_(static_cast<std::size_t>(n_grid) * n_grid, -1) {}

std::optional<std::size_t> BiasGrid::find(CellIndex c) const {
  if (c.i < 0 || c.j < 0 || c.i >= n_ || c.j >= n_) return std::nullopt;
  const int k = lookup_[static_cast<std::size_t>(c.i) * n_ + c.j];
  if (k < 0) return std::nullopt;
  return static_cast<std::size_t>(k);
}

void BiasGrid::refresh(std::size_t cell) {
  Cell& c = cells_[cell];
  int count = 0;
  for (const CellIndex d : {CellIndex{1, 0}, CellIndex{-1, 0}, CellIndex{0, 1}, CellIndex{0, -1}}) {
    if (find({c.index.i + d.i, c.index.j + d.j})) ++count;
  }
  c.neighbors = count;
  c.interior = count == 4;
}

bool BiasGrid::add(std::size_t state_index, double u, double v, std::uint64_t first_iteration,
                   Rng& rng) {
  const CellIndex ci = cell_index(domain_, n_, u, v);
  if (auto existing = find(ci)) {
    Cell& c = cells_[*existing];
    ++c.coverage;
    if (c.states.size() < kStateCap) {
      c.states.push_back(state_index);
    } else {
      std::uniform_int_distribution<std::uint64_t> slot(0, c.coverage - 1);
      const auto k = slot(rng);
      if (k < kStateCap) c.states[k] = state_index;
    }
    return false;
  }
  Cell c;
  c.index = ci;
  c.states.push_back(state_index);
  c.first_iteration = first_iteration;
  c.coverage = 1;
  cells_.push_back(std::move(c));
  const std::size_t pos = cells_.size() - 1;
  lookup_[static_cast<std::size_t>(ci.i) * n_ + ci.j] = static_cast<int>(pos);
  refresh(pos);
  for (const CellIndex d : {CellIndex{1, 0}, CellIndex{-1, 0}, CellIndex{0, 1}, CellIndex{0, -1}}) {
    if (auto nb = find({ci.i + d.i, ci.j + d.j})) refresh(*nb);
  }
  return true;
}

std::size_t BiasGrid::exterior_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return !c.interior; }));
}

BiasGrid::Selection BiasGrid::select(Rng& rng) const {
  if (cells_.empty()) throw ContractViolation("select on an empty grid");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool want_exterior = unit(rng) < exterior_bias_;
  const std::size_t ext = exterior_count();
  bool exterior = want_exterior;
  if (exterior && ext == 0) exterior = false;
  if (!exterior && ext == cells_.size()) exterior = true;

  std::size_t best = cells_.size();
  double best_imp = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const Cell& c = cells_[k];
    if (c.interior == exterior) continue;
    const double imp = c.importance();
    if (best == cells_.size() || imp > best_imp ||
        (imp == best_imp && c.first_iteration < cells_[best].first_iteration)) {
      best = k;
      best_imp = imp;
    }
  }
  const auto& states = cells_[best].states;
  std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
  return {best, states[pick(rng)], exterior};
}

void BiasGrid::penalize(std::size_t cell) {
  cells_[cell].score = std::max(cells_[cell].score * 0.5, kScoreFloor);
}

// ---------------------------------------------------------------------------------------------
// Biased explorer

BiasedExplorer::BiasedExplorer(const Scenario& scenario, const ExplorerParams& params)
    : scenario_(&scenario),
      params_(params),
      rng_(params.seed),
      atlas_(scenario.system, scenario.atlas),
      grid_(scenario.surface().domain(), scenario.n_grid, params.exterior_bias),
      coverage_(scenario.surface().domain(), scenario.n_grid),
      valid_(make_validity(scenario)) {
  params_.validate();
  ExtendedConfig root = init_root(scenario.system, scenario.world, scenario.q0);
  atlas_.create_chart(root);
  root.chart = 0;
  coverage_.record_visit(root, 1);
  grid_.add(0, root.u(), root.v(), 2, rng_);
  states_.push_back({std::move(root), -1, 0});
}

StepResult BiasedExplorer::reject(std::size_t cell, RejectReason reason) {
  grid_.penalize(cell);
  return {false, reason, 0};
}

StepResult BiasedExplorer::step() {
  ++iteration_;
  const auto& sys = scenario_->system;
  const auto sel = grid_.select(rng_);
  grid_.count_expansion(sel.cell);

  ExtendedConfig sample;
  try {
    sample = atlas_.sample_gaussian_near(states_[sel.state].state, params_.sigma, rng_);
  } catch (const SampleFailure&) {
    return reject(sel.cell, RejectReason::SampleFailure);
  } catch (const SingularityError&) {
    return reject(sel.cell, RejectReason::SampleFailure);
  }
  if (!sys.surface().in_domain(sample.u(), sample.v())) {
    return reject(sel.cell, RejectReason::TransitionFailure);
  }
  if (!valid_(sample)) return reject(sel.cell, RejectReason::InvalidState);
  const ExtendedConfig& source = states_[sel.state].state;
  if (!check_transition(sys, atlas_.params(), source, sample, params_.delta_check, valid_)) {
    return reject(sel.cell, RejectReason::TransitionFailure);
  }
  sample.chart = source.chart;
  try {
    atlas_.assign_chart(sample);
  } catch (const SingularityError&) {
    return reject(sel.cell, RejectReason::SampleFailure);
  }

  const std::size_t idx = states_.size();
  const double u = sample.u(), v = sample.v();
  coverage_.record_visit(sample, iteration_ + 1);
  states_.push_back({std::move(sample), static_cast<std::int64_t>(sel.state), iteration_});
  const bool new_cell = grid_.add(idx, u, v, iteration_ + 2, rng_);
  if (!new_cell) grid_.penalize(sel.cell);
  return {true, RejectReason::SampleFailure, idx};
}

// ---------------------------------------------------------------------------------------------
// Runs

namespace {

template <class Explorer, class StructureSize, class States>
RunResult run_loop(Algorithm algo, const Scenario& scenario, const ExplorerParams& params,
                   bool keep_states, StructureSize structure_size, States states) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  Explorer ex(scenario, params);
  RunResult r{.scenario = scenario.name,
              .algorithm = algo,
              .params = params,
              .coverage = CoverageGrid(scenario.surface().domain(), scenario.n_grid)};
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
  r.series.push_back({0, elapsed(), ex.coverage().covered_count()});
  auto done = [&] {
    if (ex.iteration() >= params.max_samples) return true;
    if (params.time_limit_s > 0 && elapsed() >= params.time_limit_s) return true;
    return params.target_cells > 0 && ex.coverage().covered_count() >= params.target_cells;
  };
  while (!done()) {
    const std::size_t before = ex.coverage().covered_count();
    const StepResult s = ex.step();
    if (s.accepted) {
      ++r.accepted;
    } else {
      ++r.rejected[static_cast<std::size_t>(s.reason)];
    }
    if (ex.coverage().covered_count() > before) {
      r.series.push_back({ex.iteration(), elapsed(), ex.coverage().covered_count()});
    }
  }
  r.iterations = ex.iteration();
  r.wall_s = elapsed();
  if (r.series.back().iteration < r.iterations) {
    r.series.push_back({r.iterations, r.wall_s, ex.coverage().covered_count()});
  }
  r.samples_per_s = r.wall_s > 0 ? static_cast<double>(r.iterations) / r.wall_s : 0.0;
  r.accepted_per_s = r.wall_s > 0 ? static_cast<double>(r.accepted) / r.wall_s : 0.0;
  r.coverage = ex.coverage();
  r.structure_size = structure_size(ex);
  r.charts = ex.atlas().size();
  if (keep_states) r.states = states(ex);
  return r;
}

}  // namespace

RunResult run_rrt(const Scenario& scenario, const ExplorerParams& params, bool keep_states) {
  return run_loop<RrtExplorer>(
      Algorithm::Rrt, scenario, params, keep_states,
      [](const RrtExplorer& e) { return e.tree().size(); },
      [](const RrtExplorer& e) { return e.tree().nodes(); });
}

RunResult run_biased(const Scenario& scenario, const ExplorerParams& params, bool keep_states) {
  return run_loop<BiasedExplorer>(
      Algorithm::Biased, scenario, params, keep_states,
      [](const BiasedExplorer& e) { return e.grid().cells().size(); },
      [](const BiasedExplorer& e) { return e.states(); });
}

RunResult run_exploration(Algorithm algo, const Scenario& scenario, const ExplorerParams& params,
                          bool keep_states) {
  return algo == Algorithm::Rrt ? run_rrt(scenario, params, keep_states)
                                : run_biased(scenario, params, keep_states);
}

}  // namespace surfcov
