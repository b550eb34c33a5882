#include "surfcov/collision.hpp"

#include "surfcov/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace surfcov {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double point_segment_distance2(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).squaredNorm();
}

// Squared unsigned distance from a segment to a box; exact, via the piecewise-quadratic
// structure of the distance along the segment.
double segment_box_distance2(const Vec3& p0, const Vec3& p1, const Box& box) {
  const Vec3 lo = box.center - box.half_extents;
  const Vec3 hi = box.center + box.half_extents;
  const Vec3 d = p1 - p0;
  std::array<double, 8> ts{};
  int count = 0;
  ts[count++] = 0.0;
  ts[count++] = 1.0;
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) continue;
    for (double bound : {lo[k], hi[k]}) {
      const double t = (bound - p0[k]) / d[k];
      if (t > 0.0 && t < 1.0) ts[count++] = t;
    }
  }
  std::sort(ts.begin(), ts.begin() + count);
  auto dist2_at = [&](double t) {
    const Vec3 p = p0 + t * d;
    const Vec3 excess = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return excess.squaredNorm();
  };
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s + 1 < count; ++s) {
    const double ta = ts[static_cast<std::size_t>(s)];
    const double tb = ts[static_cast<std::size_t>(s + 1)];
    best = std::min({best, dist2_at(ta), dist2_at(tb)});
    if (tb - ta <= 0.0) continue;
    // On (ta, tb) each axis is either inside its slab or on a fixed side: quadratic in t.
    const Vec3 mid = p0 + 0.5 * (ta + tb) * d;
    double qa = 0.0, qb = 0.0;
    for (int k = 0; k < 3; ++k) {
      double target;
      if (mid[k] < lo[k]) {
        target = lo[k];
      } else if (mid[k] > hi[k]) {
        target = hi[k];
      } else {
        continue;
      }
      // (p0k + t dk - target)^2
      qa += d[k] * d[k];
      qb += 2.0 * d[k] * (p0[k] - target);
    }
    if (qa > 0.0) {
      const double t = std::clamp(-qb / (2.0 * qa), ta, tb);
      best = std::min(best, dist2_at(t));
    }
  }
  return best;
}

// Slab test on the closed box.
bool segment_hits_box(const Vec3& p0, const Vec3& p1, const Box& box) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = p1 - p0;
  for (int k = 0; k < 3; ++k) {
    const double lo = box.center[k] - box.half_extents[k], hi = box.center[k] + box.half_extents[k];
    if (d[k] == 0.0) {
      if (p0[k] < lo || p0[k] > hi) return false;
      continue;
    }
    double a = (lo - p0[k]) / d[k], b = (hi - p0[k]) / d[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return false;
  }
  return true;
}

double sphere_box(const Vec3& c, double r, const Box& b) {
  return point_box_signed_distance(c, b) - r;
}

double capsule_box(const Capsule& cap, const Box& b) {
  return segment_box_signed_distance(cap.p0, cap.p1, b) - cap.radius;
}

}  // namespace

double segment_segment_distance2(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  // Closest points of two segments (Ericson, Real-Time Collision Detection 5.1.9).
  constexpr double eps = 1e-15;
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return r.squaredNorm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p0 + s * d1 - (q0 + t * d2)).squaredNorm();
}

double point_box_signed_distance(const Vec3& p, const Box& box) {
  const Vec3 q = (p - box.center).cwiseAbs() - box.half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

double segment_box_signed_distance(const Vec3& p0, const Vec3& p1, const Box& box) {
  if (!segment_hits_box(p0, p1, box)) return std::sqrt(segment_box_distance2(p0, p1, box));
  // Segment touches or enters the box: the signed distance along the segment is convex,
  // so golden-section search finds the deepest point.
  auto f = [&](double t) { return point_box_signed_distance(p0 + t * (p1 - p0), box); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(0.0), f(1.0), 0.0});
}

Aabb bounding_box(const Primitive& p) {
  return std::visit(overloaded{
                        [](const Sphere& s) {
                          return Aabb{s.center.array() - s.radius, s.center.array() + s.radius};
                        },
                        [](const Capsule& c) {
                          return Aabb{c.p0.cwiseMin(c.p1).array() - c.radius,
                                      c.p0.cwiseMax(c.p1).array() + c.radius};
                        },
                        [](const Box& b) {
                          return Aabb{b.center - b.half_extents, b.center + b.half_extents};
                        },
                    },
                    p);
}

double primitive_distance(const Primitive& a, const Primitive& b) {
  return std::visit(
      overloaded{
          [](const Sphere& x, const Sphere& y) {
            return (x.center - y.center).norm() - x.radius - y.radius;
          },
          [](const Sphere& x, const Capsule& y) {
            return std::sqrt(point_segment_distance2(x.center, y.p0, y.p1)) - x.radius - y.radius;
          },
          [](const Capsule& x, const Sphere& y) {
            return std::sqrt(point_segment_distance2(y.center, x.p0, x.p1)) - x.radius - y.radius;
          },
          [](const Capsule& x, const Capsule& y) {
            return std::sqrt(segment_segment_distance2(x.p0, x.p1, y.p0, y.p1)) - x.radius -
                   y.radius;
          },
          [](const Sphere& x, const Box& y) { return sphere_box(x.center, x.radius, y); },
          [](const Box& x, const Sphere& y) { return sphere_box(y.center, y.radius, x); },
          [](const Capsule& x, const Box& y) { return capsule_box(x, y); },
          [](const Box& x, const Capsule& y) { return capsule_box(y, x); },
          [](const Box&, const Box&) -> double {
            throw ContractViolation("box-box distance is not supported");
          },
      },
      a, b);
}

CollisionWorld::CollisionWorld(std::vector<Primitive> obstacles, double margin)
    : obstacles_(std::move(obstacles)), margin_(margin) {
  if (!(margin_ >= 0.0)) throw ValidationError("collision margin must be non-negative");
  boxes_.reserve(obstacles_.size());
  for (const auto& o : obstacles_) {
    const bool ok = std::visit(overloaded{
                                   [](const Sphere& s) { return s.radius > 0.0; },
                                   [](const Capsule& c) { return c.radius > 0.0; },
                                   [](const Box& b) { return (b.half_extents.array() > 0.0).all(); },
                               },
                               o);
    if (!ok) throw ValidationError("obstacle radii and half-extents must be strictly positive");
    boxes_.push_back(bounding_box(o));
  }
}

std::vector<Capsule> link_capsules(const RobotModel& robot, const VecX& q) {
  const auto chain = robot.forward(q);
  std::vector<Capsule> out;
  for (std::size_t i = 0; i < chain.link_frames.size(); ++i) {
    for (const auto& cap : robot.link_geometry()[i]) {
      out.push_back({chain.link_frames[i] * cap.p0, chain.link_frames[i] * cap.p1, cap.radius});
    }
  }
  return out;
}

bool config_in_collision(const CollisionWorld& world, const RobotModel& robot, const VecX& q) {
  if (world.empty()) return false;
  for (const auto& cap : link_capsules(robot, q)) {
    const Primitive link = cap;
    const Aabb link_box = bounding_box(link);
    for (std::size_t k = 0; k < world.obstacles_.size(); ++k) {
      if (!link_box.overlaps(world.boxes_[k], world.margin_)) continue;
      if (primitive_distance(link, world.obstacles_[k]) <= world.margin_) return true;
    }
  }
  return false;
}

bool state_valid(const ConstraintSystem& sys, const CollisionWorld& world, const ExtendedConfig& x) {
  const VecX q = x.q();
  return within_limits(sys.robot(), q) && sys.surface().in_domain(x.u(), x.v()) &&
         !config_in_collision(world, sys.robot(), q);
}

}  // namespace surfcov
