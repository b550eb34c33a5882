#pragma once

#include "surfcov/atlas.hpp"
#include "surfcov/collision.hpp"
#include "surfcov/constraint.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace surfcov {

struct ExplorerParams {
  double d_max = 0.07;          // RRT extension clamp
  double sigma = 0.04;          // Gaussian sampling std per tangent dimension
  double delta_check = 0.01;    // transition check step
  double exterior_bias = 0.75;  // probability of expanding an exterior cell
  std::uint64_t max_samples = 25000;
  double time_limit_s = 0.0;    // 0 disables the wall-clock limit
  std::uint64_t seed = 1;
  std::size_t target_cells = 0;  // stop once this many cells are covered; 0 disables

  /// Throws ValidationError unless every value is in range.
  void validate() const;
};

/// Everything needed to start an exploration: robot, surface, obstacles, start configuration.
/// Runs hold references into a Scenario, so keep it alive (and in place) while they execute.
struct Scenario {
  std::string name;
  ConstraintSystem system;
  CollisionWorld world;
  VecX q0;
  ExplorerParams defaults;
  AtlasParams atlas;
  int n_grid = 32;

  const RobotModel& robot() const { return system.robot(); }
  const Surface& surface() const { return system.surface(); }
};

/// Parses a JSON scenario document, expands maze bitmaps into wall boxes and checks that the
/// start configuration initializes. Throws ParseError or ValidationError.
std::unique_ptr<Scenario> parse_scenario(const std::filesystem::path& path);
std::unique_ptr<Scenario> parse_scenario_text(const std::string& text,
                                              const std::string& source = "<string>");

}  // namespace surfcov
