#include "surfcov/kinematics.hpp"

#include "surfcov/errors.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace surfcov {

namespace {

void check_dim(const RobotModel& robot, const VecX& q) {
  if (q.size() != robot.dof()) {
    throw ContractViolation("joint vector has length " + std::to_string(q.size()) +
                            ", robot '" + robot.name() + "' expects " +
                            std::to_string(robot.dof()));
  }
}

Transform joint_motion(const Joint& joint, double value) {
  Transform t = Transform::Identity();
  if (joint.kind == JointKind::Revolute) {
    t.linear() = Eigen::AngleAxisd(value, joint.axis).toRotationMatrix();
  } else {
    t.translation() = value * joint.axis;
  }
  return t;
}

}  // namespace

Mat3 rpy_rotation(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Transform make_transform(const Vec3& xyz, const Vec3& rpy) {
  Transform t = Transform::Identity();
  t.linear() = rpy_rotation(rpy);
  t.translation() = xyz;
  return t;
}

RobotModel::RobotModel(std::string name, std::vector<Joint> joints, Transform tool_offset,
                       std::vector<JointLimits> limits,
                       std::vector<std::vector<LinkCapsule>> link_geometry)
    : name_(std::move(name)),
      joints_(std::move(joints)),
      tool_offset_(tool_offset),
      limits_(std::move(limits)),
      links_(std::move(link_geometry)) {
  if (joints_.size() < 4) {
    throw ValidationError("robot '" + name_ + "' needs at least 4 joints, has " +
                          std::to_string(joints_.size()));
  }
  if (limits_.size() != joints_.size()) {
    throw ValidationError("robot '" + name_ + "': limits count does not match joint count");
  }
  if (links_.empty()) links_.resize(joints_.size());
  if (links_.size() != joints_.size()) {
    throw ValidationError("robot '" + name_ + "': link geometry count does not match joint count");
  }
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (std::abs(joints_[i].axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("robot '" + name_ + "': joint " + std::to_string(i) +
                            " axis is not unit length");
    }
    if (!(limits_[i].lo < limits_[i].hi)) {
      throw ValidationError("robot '" + name_ + "': joint " + std::to_string(i) +
                            " limits must satisfy lo < hi");
    }
  }
  for (const auto& link : links_) {
    for (const auto& cap : link) {
      if (!(cap.radius > 0.0)) {
        throw ValidationError("robot '" + name_ + "': capsule radius must be positive");
      }
    }
  }
}

KinematicChainState RobotModel::forward(const VecX& q) const {
  check_dim(*this, q);
  KinematicChainState state;
  const auto n = joints_.size();
  state.link_frames.reserve(n);
  state.joint_axes.reserve(n);
  state.joint_points.reserve(n);
  Transform t = Transform::Identity();
  for (std::size_t i = 0; i < n; ++i) {
    const Transform base = t * joints_[i].origin;
    state.joint_axes.push_back(base.linear() * joints_[i].axis);
    state.joint_points.push_back(base.translation());
    t = base * joint_motion(joints_[i], q[static_cast<Eigen::Index>(i)]);
    state.link_frames.push_back(t);
  }
  state.tool = t * tool_offset_;
  return state;
}

ToolPose fk_pose(const RobotModel& robot, const VecX& q) {
  const auto state = robot.forward(q);
  return {state.tool.translation(), state.tool.linear()};
}

Vec3 tool_axis(const RobotModel& robot, const VecX& q) {
  return fk_pose(robot, q).rotation.col(2).normalized();
}

Matrix6X geometric_jacobian(const KinematicChainState& state, const RobotModel& robot) {
  const int n = robot.dof();
  Matrix6X jac(6, n);
  const Vec3 tip = state.tool.translation();
  for (int i = 0; i < n; ++i) {
    const Vec3& axis = state.joint_axes[static_cast<std::size_t>(i)];
    if (robot.joints()[static_cast<std::size_t>(i)].kind == JointKind::Revolute) {
      jac.col(i).head<3>() = axis.cross(tip - state.joint_points[static_cast<std::size_t>(i)]);
      jac.col(i).tail<3>() = axis;
    } else {
      jac.col(i).head<3>() = axis;
      jac.col(i).tail<3>().setZero();
    }
  }
  return jac;
}

Matrix6X geometric_jacobian(const RobotModel& robot, const VecX& q) {
  return geometric_jacobian(robot.forward(q), robot);
}

bool within_limits(const RobotModel& robot, const VecX& q) {
  check_dim(robot, q);
  const auto& lim = robot.limits();
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const auto& l = lim[static_cast<std::size_t>(i)];
    if (!(q[i] >= l.lo && q[i] <= l.hi)) return false;
  }
  return true;
}

namespace {

Joint revolute(const Vec3& axis, const Vec3& xyz, const Vec3& rpy = Vec3::Zero()) {
  return {JointKind::Revolute, axis, make_transform(xyz, rpy)};
}

Joint prismatic(const Vec3& axis, const Vec3& xyz = Vec3::Zero()) {
  return {JointKind::Prismatic, axis, make_transform(xyz, Vec3::Zero())};
}

LinkCapsule capsule(const Vec3& a, const Vec3& b, double r) { return {a, b, r}; }

}  // namespace

RobotModel make_gantry6() {
  using std::numbers::pi;
  std::vector<Joint> joints = {
      prismatic(Vec3::UnitX()),                    //
      prismatic(Vec3::UnitY()),                    //
      prismatic(Vec3::UnitZ()),                    //
      revolute(Vec3::UnitZ(), Vec3::Zero()),       //
      revolute(Vec3::UnitY(), Vec3::Zero()),       //
      revolute(Vec3::UnitX(), Vec3::Zero()),
  };
  std::vector<JointLimits> limits = {
      {-0.7, 0.7}, {-0.7, 0.7}, {-0.5, 0.5}, {-pi / 2, pi / 2}, {-pi, pi}, {-pi, pi},
  };
  std::vector<std::vector<LinkCapsule>> links(6);
  // Vertical column of the z carriage; it does not rotate with the wrist.
  links[2].push_back(capsule({0, 0, 0.14}, {0, 0, 0.6}, 0.02));
  // Tool shaft along the tool axis, tip at the tool point.
  links[5].push_back(capsule({0, 0, 0.0}, {0, 0, 0.1}, 0.01));
  return RobotModel("gantry6", std::move(joints), Transform::Identity(), std::move(limits),
                    std::move(links));
}

RobotModel make_articulated6() {
  using std::numbers::pi;
  std::vector<Joint> joints = {
      revolute(Vec3::UnitZ(), {0, 0, 0.4}),     //
      revolute(Vec3::UnitY(), {0.025, 0, 0}),   //
      revolute(Vec3::UnitY(), {0, 0, 0.455}),   //
      revolute(Vec3::UnitX(), {0, 0, 0.035}),   //
      revolute(Vec3::UnitY(), {0.42, 0, 0}),    //
      revolute(Vec3::UnitX(), {0.08, 0, 0}),
  };
  std::vector<JointLimits> limits = {
      {-170 * pi / 180, 170 * pi / 180}, {-100 * pi / 180, 135 * pi / 180},
      {-120 * pi / 180, 156 * pi / 180}, {-185 * pi / 180, 185 * pi / 180},
      {-120 * pi / 180, 120 * pi / 180}, {-350 * pi / 180, 350 * pi / 180},
  };
  std::vector<std::vector<LinkCapsule>> links(6);
  links[0].push_back(capsule({0, 0, -0.4}, {0, 0, 0.0}, 0.08));
  links[1].push_back(capsule({0, 0, 0}, {0, 0, 0.455}, 0.06));
  links[2].push_back(capsule({0, 0, 0.035}, {0.3, 0, 0.035}, 0.05));
  links[3].push_back(capsule({0.3, 0, 0}, {0.42, 0, 0}, 0.04));
  links[4].push_back(capsule({0, 0, 0}, {0.06, 0, 0}, 0.04));
  // Tool shaft: flange to 1 cm short of the tool point (tool point at x = 0.1).
  links[5].push_back(capsule({0.0, 0, 0}, {0.09, 0, 0}, 0.012));
  // Tool z-axis points back out of the flange, i.e. along the surface normal.
  return RobotModel("articulated6", std::move(joints),
                    make_transform({0.1, 0, 0}, {0, -pi / 2, 0}), std::move(limits),
                    std::move(links));
}

RobotModel make_articulated7() {
  using std::numbers::pi;
  std::vector<Joint> joints = {
      revolute(Vec3::UnitZ(), {0, 0, 0.34}),  //
      revolute(Vec3::UnitY(), {0, 0, 0}),     //
      revolute(Vec3::UnitZ(), {0, 0, 0.2}),   //
      revolute(Vec3::UnitY(), {0, 0, 0.2}),   //
      revolute(Vec3::UnitZ(), {0, 0, 0.2}),   //
      revolute(Vec3::UnitY(), {0, 0, 0.2}),   //
      revolute(Vec3::UnitZ(), {0, 0, 0.1}),
  };
  std::vector<JointLimits> limits = {
      {-2.9, 2.9}, {-1.76, 1.76}, {-2.9, 2.9}, {-3.07, 3.07},
      {-2.9, 2.9}, {-3.07, 3.07}, {-2.9, 2.9},
  };
  std::vector<std::vector<LinkCapsule>> links(7);
  links[0].push_back(capsule({0, 0, -0.34}, {0, 0, 0}, 0.07));
  links[1].push_back(capsule({0, 0, 0}, {0, 0, 0.2}, 0.05));
  links[2].push_back(capsule({0, 0, 0}, {0, 0, 0.2}, 0.05));
  links[3].push_back(capsule({0, 0, 0}, {0, 0, 0.2}, 0.045));
  links[4].push_back(capsule({0, 0, 0}, {0, 0, 0.2}, 0.045));
  links[5].push_back(capsule({0, 0, 0}, {0, 0, 0.1}, 0.04));
  links[6].push_back(capsule({0, 0, 0.0}, {0, 0, 0.09}, 0.012));
  return RobotModel("articulated7", std::move(joints), make_transform({0, 0, 0.1}, {pi, 0, 0}),
                    std::move(limits), std::move(links));
}

RobotModel builtin_robot(const std::string& name) {
  if (name == "gantry6") return make_gantry6();
  if (name == "articulated6") return make_articulated6();
  if (name == "articulated7") return make_articulated7();
  throw ValidationError("unknown built-in robot '" + name + "'");
}

}  // namespace surfcov
