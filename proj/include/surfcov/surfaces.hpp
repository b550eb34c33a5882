#pragma once

#include "surfcov/kinematics.hpp"

#include <utility>
#include <vector>

namespace surfcov {

enum class SurfaceKind { Plane, Paraboloid, Sinusoid, BezierPatch };

/// Closed parameter rectangle [u_min, u_max] x [v_min, v_max].
struct Domain {
  double u_min = 0.0;
  double u_max = 1.0;
  double v_min = 0.0;
  double v_max = 1.0;

  bool contains(double u, double v) const {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
  double clamp_u(double u) const { return u < u_min ? u_min : (u > u_max ? u_max : u); }
  double clamp_v(double v) const { return v < v_min ? v_min : (v > v_max ? v_max : v); }
};

struct SurfacePartials {
  Vec3 du = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
};

struct SurfaceNormal {
  Vec3 raw = Vec3::Zero();   // du x dv
  Vec3 unit = Vec3::Zero();
};

struct UnitNormalPartials {
  Vec3 du = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
};

struct SurfaceCoords {
  double u = 0.0;
  double v = 0.0;
};

/// A C2 parametric surface S(u, v) over a rectangular domain.
///
/// Plane:      S = origin + u * span_u + v * span_v
/// Paraboloid: S = origin + (u, v, a u^2 + b v^2)
/// Sinusoid:   S = origin + (u, v, A cos(f u) cos(f v))
/// Bezier:     tensor-product Bernstein patch, parameters mapped from the domain to [0, 1]^2
class Surface {
 public:
  static Surface plane(const Vec3& origin, const Vec3& span_u, const Vec3& span_v, Domain domain);
  static Surface paraboloid(const Vec3& origin, double a, double b, Domain domain);
  static Surface sinusoid(const Vec3& origin, double amplitude, double frequency, Domain domain);
  /// control[i][j] is the control point at u-index i, v-index j.
  static Surface bezier_patch(std::vector<std::vector<Vec3>> control, Domain domain);

  SurfaceKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }

  Vec3 eval(double u, double v) const;
  SurfacePartials partials(double u, double v) const;
  /// Throws DegenerateSurfaceError when |du x dv| <= 1e-12.
  SurfaceNormal normal(double u, double v) const;
  /// Derivatives of the unit normal. Analytic except for Bezier patches (central differences).
  UnitNormalPartials unit_normal_partials(double u, double v) const;
  bool in_domain(double u, double v) const { return domain_.contains(u, v); }

  /// Multi-start bound-constrained Newton over the domain; always returns the best point found.
  SurfaceCoords closest_point(const Vec3& p) const;

  /// Smallest |du x dv| over an n x n probe grid of the domain.
  double min_normal_norm(int n = 64) const;

  // Shape parameters, for serialization and tests.
  const Vec3& origin() const { return origin_; }
  const Vec3& span_u() const { return span_u_; }
  const Vec3& span_v() const { return span_v_; }
  double coeff_a() const { return a_; }
  double coeff_b() const { return b_; }
  const std::vector<std::vector<Vec3>>& control_points() const { return control_; }

 private:
  Surface(SurfaceKind kind, Domain domain);

  struct Second {
    Vec3 uu, uv, vv;
  };
  Second second_partials(double u, double v) const;
  void bezier_eval(double u, double v, Vec3* p, Vec3* du, Vec3* dv) const;

  SurfaceKind kind_;
  Domain domain_;
  Vec3 origin_ = Vec3::Zero();
  Vec3 span_u_ = Vec3::UnitX();
  Vec3 span_v_ = Vec3::UnitY();
  double a_ = 0.0;  // paraboloid a / sinusoid amplitude
  double b_ = 0.0;  // paraboloid b / sinusoid frequency
  std::vector<std::vector<Vec3>> control_;
};

}  // namespace surfcov
