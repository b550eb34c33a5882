#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <string>
#include <vector>

namespace surfcov {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Transform = Eigen::Isometry3d;
using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

enum class JointKind { Revolute, Prismatic };

struct Joint {
  JointKind kind = JointKind::Revolute;
  Vec3 axis = Vec3::UnitZ();                 // unit, expressed in the joint frame
  Transform origin = Transform::Identity();  // parent frame -> joint frame
};

/// Closed interval; radians for revolute joints, meters for prismatic ones.
struct JointLimits {
  double lo = 0.0;
  double hi = 0.0;
};

/// Segment swept by a sphere, in the frame of the link it belongs to.
struct LinkCapsule {
  Vec3 p0 = Vec3::Zero();
  Vec3 p1 = Vec3::Zero();
  double radius = 0.0;
};

struct ToolPose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

/// World poses of every link frame plus the tool frame for one configuration.
struct KinematicChainState {
  std::vector<Transform> link_frames;  // frame i sits after joint i's motion
  std::vector<Vec3> joint_axes;        // world-frame axis of joint i
  std::vector<Vec3> joint_points;      // world-frame point on joint i's axis
  Transform tool = Transform::Identity();
};

/// Serial chain of revolute/prismatic joints. Immutable once constructed.
class RobotModel {
 public:
  RobotModel(std::string name, std::vector<Joint> joints, Transform tool_offset,
             std::vector<JointLimits> limits,
             std::vector<std::vector<LinkCapsule>> link_geometry);

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const Transform& tool_offset() const { return tool_offset_; }
  const std::vector<JointLimits>& limits() const { return limits_; }
  const std::vector<std::vector<LinkCapsule>>& link_geometry() const { return links_; }

  KinematicChainState forward(const VecX& q) const;

 private:
  std::string name_;
  std::vector<Joint> joints_;
  Transform tool_offset_;
  std::vector<JointLimits> limits_;
  std::vector<std::vector<LinkCapsule>> links_;
};

ToolPose fk_pose(const RobotModel& robot, const VecX& q);

/// World direction of the tool frame's z-axis.
Vec3 tool_axis(const RobotModel& robot, const VecX& q);

/// 6 x n; rows 0-2 linear velocity of the tool point, rows 3-5 world angular velocity.
Matrix6X geometric_jacobian(const RobotModel& robot, const VecX& q);
Matrix6X geometric_jacobian(const KinematicChainState& state, const RobotModel& robot);

bool within_limits(const RobotModel& robot, const VecX& q);

/// 3 prismatic joints along x, y, z followed by a Z-Y-X wrist. Zero tool offset.
RobotModel make_gantry6();
/// Six-axis industrial arm (shoulder offset, elbow offset, spherical wrist).
RobotModel make_articulated6();
/// Seven-axis redundant arm with alternating roll/pitch joints.
RobotModel make_articulated7();

/// Looks up one of "gantry6", "articulated6", "articulated7".
RobotModel builtin_robot(const std::string& name);

Transform make_transform(const Vec3& xyz, const Vec3& rpy);
Mat3 rpy_rotation(const Vec3& rpy);

}  // namespace surfcov
