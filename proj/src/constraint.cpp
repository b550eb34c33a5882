#include "surfcov/constraint.hpp"

#include "surfcov/errors.hpp"

#include <cmath>
#include <utility>

namespace surfcov {

ExtendedConfig::ExtendedConfig(const VecX& q, double u, double v) : coords_(q.size() + 2) {
  coords_.head(q.size()) = q;
  coords_[q.size()] = u;
  coords_[q.size() + 1] = v;
}

double ambient_distance(const ExtendedConfig& a, const ExtendedConfig& b) {
  if (a.coords().size() != b.coords().size()) {
    throw ContractViolation("ambient_distance between states of different dimension");
  }
  return (a.coords() - b.coords()).norm();
}

ConstraintSystem::ConstraintSystem(std::shared_ptr<const RobotModel> robot,
                                   std::shared_ptr<const Surface> surface,
                                   ProjectionSettings settings)
    : robot_(std::move(robot)), surface_(std::move(surface)), settings_(settings) {
  if (!robot_ || !surface_) throw ContractViolation("constraint system needs a robot and a surface");
  if (!(settings_.tolerance > 0.0) || settings_.max_iterations < 1) {
    throw ValidationError("projection tolerance and iteration count must be positive");
  }
}

void ConstraintSystem::evaluate(const ExtendedConfig& x, Vec5* value, Matrix5X* jac) const {
  const int n = robot_->dof();
  if (x.coords().size() != n + 2) {
    throw ContractViolation("extended configuration has wrong dimension");
  }
  const VecX q = x.q();
  const double u = x.u();
  const double v = x.v();
  const auto chain = robot_->forward(q);
  const Mat3 rot = chain.tool.linear();
  const auto nrm = surface_->normal(u, v);
  const Vec3 local_normal = rot.transpose() * nrm.unit;

  if (value) {
    value->head<3>() = chain.tool.translation() - surface_->eval(u, v);
    (*value)[3] = local_normal.x();
    (*value)[4] = local_normal.y();
  }
  if (jac) {
    jac->resize(5, n + 2);
    const Matrix6X gj = geometric_jacobian(chain, *robot_);
    jac->block(0, 0, 3, n) = gj.topRows<3>();
    // d(R^T n)/dq_i = R^T (n x w_i) for world angular velocity w_i.
    for (int i = 0; i < n; ++i) {
      const Vec3 w = gj.col(i).tail<3>();
      const Vec3 d = rot.transpose() * nrm.unit.cross(w);
      (*jac)(3, i) = d.x();
      (*jac)(4, i) = d.y();
    }
    const auto part = surface_->partials(u, v);
    jac->block<3, 1>(0, n) = -part.du;
    jac->block<3, 1>(0, n + 1) = -part.dv;
    const auto dn = surface_->unit_normal_partials(u, v);
    const Vec3 du = rot.transpose() * dn.du;
    const Vec3 dv = rot.transpose() * dn.dv;
    (*jac)(3, n) = du.x();
    (*jac)(4, n) = du.y();
    (*jac)(3, n + 1) = dv.x();
    (*jac)(4, n + 1) = dv.y();
  }
}

Vec5 ConstraintSystem::constraint(const ExtendedConfig& x) const {
  Vec5 c;
  evaluate(x, &c, nullptr);
  return c;
}

Matrix5X ConstraintSystem::jacobian(const ExtendedConfig& x) const {
  Matrix5X j;
  evaluate(x, nullptr, &j);
  return j;
}

ExtendedConfig ConstraintSystem::project(ExtendedConfig x) const {
  Vec5 c;
  Matrix5X jac;
  evaluate(x, &c, nullptr);
  double norm = c.norm();
  for (int it = 0;; ++it) {
    const double inf_norm = c.lpNorm<Eigen::Infinity>();
    if (inf_norm <= settings_.tolerance) {
      x.on_manifold = true;
      x.residual = inf_norm;
      return x;
    }
    if (it >= settings_.max_iterations || !std::isfinite(inf_norm)) break;

    evaluate(x, nullptr, &jac);
    Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] < settings_.singular_threshold) {
      throw SingularityError("constraint Jacobian is rank deficient during projection");
    }
    const VecX step = svd.solve(c);

    // Full step, halved up to 4 times while the residual does not decrease.
    ExtendedConfig trial = x;
    Vec5 trial_c;
    double alpha = 1.0;
    for (int halving = 0; halving <= 4; ++halving) {
      trial.coords() = x.coords() - alpha * step;
      try {
        evaluate(trial, &trial_c, nullptr);
      } catch (const DegenerateSurfaceError&) {
        trial_c.setConstant(std::numeric_limits<double>::infinity());
      }
      if (trial_c.norm() < norm) break;
      alpha *= 0.5;
    }
    x.coords() = trial.coords();
    c = trial_c;
    norm = c.norm();
  }
  throw ProjectionFailure("Newton projection did not converge within " +
                          std::to_string(settings_.max_iterations) + " iterations");
}

int ConstraintSystem::alignment_sign(const ExtendedConfig& x) const {
  const Vec3 axis = tool_axis(*robot_, x.q());
  const double dot = axis.dot(surface_->normal(x.u(), x.v()).unit);
  if (!(std::abs(dot) >= 0.5)) {
    throw ConsistencyError("tool axis is not aligned with the surface normal (dot = " +
                           std::to_string(dot) + ")");
  }
  return dot > 0 ? 1 : -1;
}

}  // namespace surfcov
