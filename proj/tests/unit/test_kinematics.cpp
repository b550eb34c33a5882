#include "helpers.hpp"

#include "surfcov/errors.hpp"

#include <doctest.h>

using namespace surfcov;
using namespace testutil;

namespace {

// Independent forward kinematics: explicit 4x4 homogeneous products with Rodrigues rotations.
Eigen::Matrix4d rodrigues_motion(const Joint& j, double q) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  if (j.kind == JointKind::Prismatic) {
    m.block<3, 1>(0, 3) = j.axis * q;
    return m;
  }
  const Vec3 k = j.axis;
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  m.block<3, 3>(0, 0) = Mat3::Identity() + std::sin(q) * K + (1 - std::cos(q)) * K * K;
  return m;
}

Eigen::Matrix4d oracle_fk(const RobotModel& r, const VecX& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < r.dof(); ++i) {
    const Joint& j = r.joints()[static_cast<std::size_t>(i)];
    t = t * j.origin.matrix() * rodrigues_motion(j, q[i]);
  }
  return t * r.tool_offset().matrix();
}

Vec3 rotation_log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("gantry6 forward kinematics") {
    const auto g = builtin_robot("gantry6");
    auto p = fk_pose(g, VecX::Zero(6));
    CHECK(p.position.norm() == doctest::Approx(0.0));
    CHECK((p.rotation - Mat3::Identity()).norm() == doctest::Approx(0.0));

    p = fk_pose(g, vec({0.2, -0.1, 0.3, 0, 0, 0}));
    CHECK((p.position - Vec3(0.2, -0.1, 0.3)).norm() < 1e-15);
    CHECK((p.rotation - Mat3::Identity()).norm() < 1e-15);
  }

  TEST_CASE("articulated6 home position equals the summed link offsets") {
    const auto a = builtin_robot("articulated6");
    // Base 0.4 up, shoulder 0.025 forward, upper arm 0.455 up, elbow 0.035 up, forearm 0.42,
    // wrist 0.08 and tool 0.1 forward.
    const Vec3 expected(0.025 + 0.42 + 0.08 + 0.1, 0.0, 0.4 + 0.455 + 0.035);
    CHECK((fk_pose(a, VecX::Zero(6)).position - expected).norm() < 1e-12);
    CHECK((oracle_fk(a, VecX::Zero(6)).block<3, 1>(0, 3) - expected).norm() < 1e-12);
  }

  TEST_CASE("forward kinematics matches the transform-composition oracle") {
    std::mt19937_64 rng(11);
    for (const char* name : {"gantry6", "articulated6", "articulated7"}) {
      const auto r = builtin_robot(name);
      for (int k = 0; k < 50; ++k) {
        const VecX q = random_q(r, rng);
        const Eigen::Matrix4d t = oracle_fk(r, q);
        const ToolPose p = fk_pose(r, q);
        CHECK((p.position - t.block<3, 1>(0, 3)).norm() < 1e-12);
        CHECK((p.rotation - t.block<3, 3>(0, 0)).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("tool axis examples") {
    const auto g = builtin_robot("gantry6");
    CHECK((tool_axis(g, VecX::Zero(6)) - Vec3::UnitZ()).norm() < 1e-15);
    CHECK((tool_axis(g, vec({0, 0, 0, 0, kPi / 2, 0})) - Vec3::UnitX()).norm() < 1e-15);
    const Mat3 rz = Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ()).toRotationMatrix();
    const Mat3 ry = Eigen::AngleAxisd(kPi / 2, Vec3::UnitY()).toRotationMatrix();
    const Vec3 expected = rz * ry * Vec3::UnitZ();
    CHECK((expected - Vec3::UnitY()).norm() < 1e-15);
    CHECK((tool_axis(g, vec({0, 0, 0, kPi / 2, kPi / 2, 0})) - expected).norm() < 1e-15);
  }

  TEST_CASE("gantry6 Jacobian structure") {
    const auto g = builtin_robot("gantry6");
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
      const Matrix6X j = geometric_jacobian(g, random_q(g, rng));
      for (int c = 0; c < 3; ++c) {
        Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
        e[c] = 1.0;
        CHECK((j.col(c) - e).norm() < 1e-15);
      }
      for (int c = 3; c < 6; ++c) CHECK(j.col(c).head<3>().norm() < 1e-15);
    }
  }

  TEST_CASE("Jacobian matches finite differences of fk_pose") {
    const double h = 1e-6;
    std::mt19937_64 rng(5);
    for (const char* name : {"gantry6", "articulated6", "articulated7"}) {
      const auto r = builtin_robot(name);
      for (int k = 0; k < 30; ++k) {
        const VecX q = random_q(r, rng);
        const Matrix6X j = geometric_jacobian(r, q);
        const ToolPose p0 = fk_pose(r, q);
        double max_err = 0.0;
        for (int c = 0; c < r.dof(); ++c) {
          VecX qp = q, qm = q;
          qp[c] += h;
          qm[c] -= h;
          const ToolPose pp = fk_pose(r, qp), pm = fk_pose(r, qm);
          const Vec3 lin = (pp.position - pm.position) / (2 * h);
          const Vec3 ang = (rotation_log(pp.rotation * p0.rotation.transpose()) -
                            rotation_log(pm.rotation * p0.rotation.transpose())) /
                           (2 * h);
          max_err = std::max({max_err, (lin - j.col(c).head<3>()).cwiseAbs().maxCoeff(),
                              (ang - j.col(c).tail<3>()).cwiseAbs().maxCoeff()});
        }
        CHECK(max_err <= 1e-5);
      }
    }
  }

  TEST_CASE("Jacobian-vector products agree with directional differences") {
    const double h = 1e-6;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    for (const char* name : {"gantry6", "articulated6", "articulated7"}) {
      const auto r = builtin_robot(name);
      for (int k = 0; k < 30; ++k) {
        const VecX q = random_q(r, rng);
        VecX d(r.dof());
        for (int i = 0; i < r.dof(); ++i) d[i] = n01(rng);
        d.normalize();
        const Eigen::Matrix<double, 6, 1> jv = geometric_jacobian(r, q) * d;
        const ToolPose p0 = fk_pose(r, q), pp = fk_pose(r, q + h * d), pm = fk_pose(r, q - h * d);
        const Vec3 lin = (pp.position - pm.position) / (2 * h);
        const Vec3 ang = (rotation_log(pp.rotation * p0.rotation.transpose()) -
                          rotation_log(pm.rotation * p0.rotation.transpose())) /
                         (2 * h);
        CHECK((lin - jv.head<3>()).cwiseAbs().maxCoeff() <= 1e-5);
        CHECK((ang - jv.tail<3>()).cwiseAbs().maxCoeff() <= 1e-5);
      }
    }
  }

  TEST_CASE("rotation is orthonormal and tool axis is unit") {
    std::mt19937_64 rng(9);
    for (const char* name : {"gantry6", "articulated6", "articulated7"}) {
      const auto r = builtin_robot(name);
      for (int k = 0; k < 200; ++k) {
        const VecX q = random_q(r, rng, 3.0);
        const Mat3 rot = fk_pose(r, q).rotation;
        CHECK((rot.transpose() * rot - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(std::abs(rot.determinant() - 1.0) <= 1e-9);
        CHECK(std::abs(tool_axis(r, q).norm() - 1.0) <= 1e-12);
      }
    }
  }

  TEST_CASE("joint limits are closed intervals") {
    std::vector<Joint> joints(4);
    std::vector<JointLimits> limits(4, JointLimits{-1.0, 1.0});
    const RobotModel r("box4", joints, Transform::Identity(), limits, {});
    CHECK(within_limits(r, VecX::Zero(4)));
    VecX q = VecX::Zero(4);
    q[2] = 1.0;
    CHECK(within_limits(r, q));
    q[2] = 1.0 + 1e-12;
    CHECK_FALSE(within_limits(r, q));
  }

  TEST_CASE("robot model validation") {
    std::vector<JointLimits> lim4(4, JointLimits{-1.0, 1.0});
    CHECK_THROWS_AS(RobotModel("short", std::vector<Joint>(3), Transform::Identity(),
                               std::vector<JointLimits>(3, JointLimits{-1, 1}), {}),
                    ValidationError);
    std::vector<Joint> bad(4);
    bad[1].axis = Vec3(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(RobotModel("axis", bad, Transform::Identity(), lim4, {}), ValidationError);
    std::vector<JointLimits> inverted = lim4;
    inverted[0] = {1.0, 1.0};
    CHECK_THROWS_AS(RobotModel("limits", std::vector<Joint>(4), Transform::Identity(), inverted, {}),
                    ValidationError);
    CHECK_THROWS(builtin_robot("no_such_robot"));
  }
}
