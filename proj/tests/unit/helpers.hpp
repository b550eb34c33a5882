#pragma once

#include "surfcov/collision.hpp"
#include "surfcov/constraint.hpp"
#include "surfcov/errors.hpp"
#include "surfcov/explorers.hpp"
#include "surfcov/scenario.hpp"

#include <memory>
#include <numbers>
#include <random>
#include <string>

namespace testutil {

using namespace surfcov;
inline constexpr double kPi = std::numbers::pi;

inline std::string scenario_path(const std::string& name) {
  return std::string(SURFCOV_SCENARIO_DIR) + "/" + name + ".scenario";
}

inline const char* const kShippedScenarios[] = {
    "gantry_plane",       "gantry_wall",         "gantry_curved",     "gantry_maze",
    "articulated6_plane", "articulated6_curved", "articulated6_maze", "articulated7_plane",
    "articulated7_curved", "articulated7_maze"};

inline std::shared_ptr<const RobotModel> robot(const std::string& name) {
  return std::make_shared<const RobotModel>(builtin_robot(name));
}

inline Surface unit_plane(double half = 0.5) {
  return Surface::plane(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), {-half, half, -half, half});
}

inline ConstraintSystem gantry_plane_system() {
  return ConstraintSystem(robot("gantry6"), std::make_shared<const Surface>(unit_plane()));
}

inline ConstraintSystem gantry_system(Surface s) {
  return ConstraintSystem(robot("gantry6"), std::make_shared<const Surface>(std::move(s)));
}

inline VecX vec(std::initializer_list<double> xs) {
  VecX v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline VecX random_q(const RobotModel& r, std::mt19937_64& rng, double shrink = 1.0) {
  VecX q(r.dof());
  for (int i = 0; i < r.dof(); ++i) {
    const auto& l = r.limits()[static_cast<std::size_t>(i)];
    const double mid = 0.5 * (l.lo + l.hi), half = 0.5 * (l.hi - l.lo) * shrink;
    q[i] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng);
  }
  return q;
}

/// Random (q, u, v) drawn from the joint box times the domain.
inline ExtendedConfig random_ambient(const ConstraintSystem& sys, std::mt19937_64& rng) {
  const auto& d = sys.surface().domain();
  std::uniform_real_distribution<double> uu(d.u_min, d.u_max), vv(d.v_min, d.v_max);
  const VecX q = random_q(sys.robot(), rng);
  const double u = uu(rng);
  return ExtendedConfig(q, u, vv(rng));
}

/// Random on-manifold states obtained by projecting random ambient points.
inline std::vector<ExtendedConfig> random_on_manifold(const ConstraintSystem& sys, std::size_t count,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ExtendedConfig> out;
  for (int attempt = 0; out.size() < count && attempt < 200000; ++attempt) {
    try {
      ExtendedConfig x = sys.project(random_ambient(sys, rng));
      if (sys.surface().in_domain(x.u(), x.v())) out.push_back(std::move(x));
    } catch (const Error&) {
    }
  }
  return out;
}

}  // namespace testutil
