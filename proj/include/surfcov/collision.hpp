#pragma once

#include "surfcov/constraint.hpp"
#include "surfcov/kinematics.hpp"

#include <variant>
#include <vector>

namespace surfcov {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct Capsule {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  double radius = 0.0;
};

/// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
};

using Primitive = std::variant<Sphere, Capsule, Box>;

struct Aabb {
  Vec3 lo;
  Vec3 hi;
  bool overlaps(const Aabb& o, double margin) const {
    return (lo.array() - margin <= o.hi.array()).all() && (o.lo.array() - margin <= hi.array()).all();
  }
};

Aabb bounding_box(const Primitive& p);

/// Signed separation distance; negative values mean penetration.
/// Box-box pairs are not supported (ContractViolation).
double primitive_distance(const Primitive& a, const Primitive& b);

/// Closest points between segments [p0, p1] and [q0, q1]; returns the squared distance.
double segment_segment_distance2(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

/// Signed distance from a point to an axis-aligned box.
double point_box_signed_distance(const Vec3& p, const Box& box);

/// Signed distance from a segment to an axis-aligned box (min over the segment).
double segment_box_signed_distance(const Vec3& p0, const Vec3& p1, const Box& box);

/// Static obstacles; contact at exactly `margin` counts as collision.
class CollisionWorld {
 public:
  CollisionWorld() = default;
  explicit CollisionWorld(std::vector<Primitive> obstacles, double margin = 0.0);

  const std::vector<Primitive>& obstacles() const { return obstacles_; }
  double margin() const { return margin_; }
  bool empty() const { return obstacles_.empty(); }

 private:
  std::vector<Primitive> obstacles_;
  std::vector<Aabb> boxes_;
  double margin_ = 0.0;

  friend bool config_in_collision(const CollisionWorld&, const RobotModel&, const VecX&);
};

/// World-frame link capsules of the robot at q.
std::vector<Capsule> link_capsules(const RobotModel& robot, const VecX& q);

bool config_in_collision(const CollisionWorld& world, const RobotModel& robot, const VecX& q);

/// within_limits && in_domain && !config_in_collision.
bool state_valid(const ConstraintSystem& sys, const CollisionWorld& world, const ExtendedConfig& x);

}  // namespace surfcov
