#pragma once

#include "surfcov/kinematics.hpp"
#include "surfcov/surfaces.hpp"

#include <limits>
#include <memory>

namespace surfcov {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Matrix5X = Eigen::Matrix<double, 5, Eigen::Dynamic>;

/// A point (q, u, v) of the extended configuration space, stored as one flat vector.
class ExtendedConfig {
 public:
  ExtendedConfig() = default;
  ExtendedConfig(const VecX& q, double u, double v);
  explicit ExtendedConfig(VecX coords) : coords_(std::move(coords)) {}

  const VecX& coords() const { return coords_; }
  VecX& coords() { return coords_; }
  Eigen::Index dof() const { return coords_.size() - 2; }
  VecX q() const { return coords_.head(dof()); }
  double u() const { return coords_[coords_.size() - 2]; }
  double v() const { return coords_[coords_.size() - 1]; }

  /// Set by ConstraintSystem::project.
  bool on_manifold = false;
  double residual = std::numeric_limits<double>::infinity();  // |C|_inf at last evaluation
  int chart = -1;                                             // owning atlas chart, if any

 private:
  VecX coords_;
};

double ambient_distance(const ExtendedConfig& a, const ExtendedConfig& b);

struct ProjectionSettings {
  double tolerance = 1e-6;  // |C|_inf accepted as on-manifold
  int max_iterations = 50;
  double singular_threshold = 1e-9;  // smallest singular value of J_C
};

/// Stacked position/orientation constraint C(q, u, v) tying the tool to the surface.
///
/// Rows 0-2: f_pos(q) - S(u, v).
/// Rows 3-4: first two components of f_rot(q)^T n(u, v) with n the unit normal.
class ConstraintSystem {
 public:
  ConstraintSystem(std::shared_ptr<const RobotModel> robot, std::shared_ptr<const Surface> surface,
                   ProjectionSettings settings = {});

  const RobotModel& robot() const { return *robot_; }
  const Surface& surface() const { return *surface_; }
  const ProjectionSettings& settings() const { return settings_; }
  std::shared_ptr<const RobotModel> robot_ptr() const { return robot_; }
  std::shared_ptr<const Surface> surface_ptr() const { return surface_; }

  int ambient_dim() const { return robot_->dof() + 2; }
  static constexpr int codim() { return 5; }
  int manifold_dim() const { return robot_->dof() - 3; }

  Vec5 constraint(const ExtendedConfig& x) const;
  /// 5 x (n + 2).
  Matrix5X jacobian(const ExtendedConfig& x) const;

  /// Damped minimum-norm Newton projection onto C = 0.
  /// Throws ProjectionFailure or SingularityError.
  ExtendedConfig project(ExtendedConfig x) const;

  /// Sign of tool_axis . unit normal; requires an on-manifold state.
  int alignment_sign(const ExtendedConfig& x) const;

 private:
  void evaluate(const ExtendedConfig& x, Vec5* value, Matrix5X* jac) const;

  std::shared_ptr<const RobotModel> robot_;
  std::shared_ptr<const Surface> surface_;
  ProjectionSettings settings_;
};

}  // namespace surfcov
