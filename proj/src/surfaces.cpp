#include "surfcov/surfaces.hpp"

#include "surfcov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace surfcov {

namespace {

void validate_domain(const Domain& d) {
  if (!(d.u_min < d.u_max) || !(d.v_min < d.v_max)) {
    throw ValidationError("surface domain must satisfy u_min < u_max and v_min < v_max");
  }
}

// Bernstein basis values and first derivatives of degree `deg` at t.
void bernstein(int deg, double t, std::vector<double>& b, std::vector<double>& db) {
  b.assign(static_cast<std::size_t>(deg) + 1, 0.0);
  db.assign(static_cast<std::size_t>(deg) + 1, 0.0);
  // Degree deg-1 basis first, for the derivative.
  std::vector<double> lower(static_cast<std::size_t>(deg) + 1, 0.0);
  lower[0] = 1.0;
  for (int k = 1; k < deg; ++k) {
    for (int i = k; i >= 0; --i) {
      const double left = i > 0 ? lower[static_cast<std::size_t>(i - 1)] * t : 0.0;
      lower[static_cast<std::size_t>(i)] = lower[static_cast<std::size_t>(i)] * (1.0 - t) + left;
    }
  }
  if (deg == 0) {
    b[0] = 1.0;
    return;
  }
  for (int i = 0; i <= deg; ++i) {
    const double lo = i > 0 ? lower[static_cast<std::size_t>(i - 1)] : 0.0;
    const double hi = i < deg ? lower[static_cast<std::size_t>(i)] : 0.0;
    b[static_cast<std::size_t>(i)] = lo * t + hi * (1.0 - t);
    db[static_cast<std::size_t>(i)] = deg * (lo - hi);
  }
}

}  // namespace

Surface::Surface(SurfaceKind kind, Domain domain) : kind_(kind), domain_(domain) {
  validate_domain(domain_);
}

Surface Surface::plane(const Vec3& origin, const Vec3& span_u, const Vec3& span_v, Domain domain) {
  Surface s(SurfaceKind::Plane, domain);
  s.origin_ = origin;
  s.span_u_ = span_u;
  s.span_v_ = span_v;
  if (span_u.cross(span_v).norm() <= 1e-9) {
    throw ValidationError("plane spanning vectors are parallel");
  }
  return s;
}

Surface Surface::paraboloid(const Vec3& origin, double a, double b, Domain domain) {
  Surface s(SurfaceKind::Paraboloid, domain);
  s.origin_ = origin;
  s.a_ = a;
  s.b_ = b;
  return s;
}

Surface Surface::sinusoid(const Vec3& origin, double amplitude, double frequency, Domain domain) {
  Surface s(SurfaceKind::Sinusoid, domain);
  s.origin_ = origin;
  s.a_ = amplitude;
  s.b_ = frequency;
  return s;
}

Surface Surface::bezier_patch(std::vector<std::vector<Vec3>> control, Domain domain) {
  if (control.size() < 2 || control.front().size() < 2) {
    throw ValidationError("bezier patch needs at least a 2 x 2 control grid");
  }
  for (const auto& row : control) {
    if (row.size() != control.front().size()) {
      throw ValidationError("bezier control grid rows must have equal length");
    }
  }
  Surface s(SurfaceKind::BezierPatch, domain);
  s.control_ = std::move(control);
  if (s.min_normal_norm() <= 1e-9) {
    throw ValidationError("bezier patch parametrization is degenerate");
  }
  return s;
}

void Surface::bezier_eval(double u, double v, Vec3* p, Vec3* du, Vec3* dv) const {
  const double su = 1.0 / (domain_.u_max - domain_.u_min);
  const double sv = 1.0 / (domain_.v_max - domain_.v_min);
  const double s = (u - domain_.u_min) * su;
  const double t = (v - domain_.v_min) * sv;
  const int m = static_cast<int>(control_.size()) - 1;
  const int k = static_cast<int>(control_.front().size()) - 1;
  std::vector<double> bu, dbu, bv, dbv;
  bernstein(m, s, bu, dbu);
  bernstein(k, t, bv, dbv);
  Vec3 acc = Vec3::Zero(), acc_u = Vec3::Zero(), acc_v = Vec3::Zero();
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= k; ++j) {
      const Vec3& c = control_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const auto ii = static_cast<std::size_t>(i);
      const auto jj = static_cast<std::size_t>(j);
      acc += bu[ii] * bv[jj] * c;
      acc_u += dbu[ii] * bv[jj] * c;
      acc_v += bu[ii] * dbv[jj] * c;
    }
  }
  if (p) *p = acc;
  if (du) *du = acc_u * su;
  if (dv) *dv = acc_v * sv;
}

Vec3 Surface::eval(double u, double v) const {
  switch (kind_) {
    case SurfaceKind::Plane:
      return origin_ + u * span_u_ + v * span_v_;
    case SurfaceKind::Paraboloid:
      return origin_ + Vec3(u, v, a_ * u * u + b_ * v * v);
    case SurfaceKind::Sinusoid:
      return origin_ + Vec3(u, v, a_ * std::cos(b_ * u) * std::cos(b_ * v));
    case SurfaceKind::BezierPatch: {
      Vec3 p;
      bezier_eval(u, v, &p, nullptr, nullptr);
      return p;
    }
  }
  return Vec3::Zero();
}

SurfacePartials Surface::partials(double u, double v) const {
  switch (kind_) {
    case SurfaceKind::Plane:
      return {span_u_, span_v_};
    case SurfaceKind::Paraboloid:
      return {Vec3(1, 0, 2 * a_ * u), Vec3(0, 1, 2 * b_ * v)};
    case SurfaceKind::Sinusoid: {
      const double cu = std::cos(b_ * u), cv = std::cos(b_ * v);
      const double su = std::sin(b_ * u), sv = std::sin(b_ * v);
      return {Vec3(1, 0, -a_ * b_ * su * cv), Vec3(0, 1, -a_ * b_ * cu * sv)};
    }
    case SurfaceKind::BezierPatch: {
      SurfacePartials out;
      bezier_eval(u, v, nullptr, &out.du, &out.dv);
      return out;
    }
  }
  return {};
}

Surface::Second Surface::second_partials(double u, double v) const {
  switch (kind_) {
    case SurfaceKind::Paraboloid:
      return {Vec3(0, 0, 2 * a_), Vec3::Zero(), Vec3(0, 0, 2 * b_)};
    case SurfaceKind::Sinusoid: {
      const double cu = std::cos(b_ * u), cv = std::cos(b_ * v);
      const double su = std::sin(b_ * u), sv = std::sin(b_ * v);
      const double k = a_ * b_ * b_;
      return {Vec3(0, 0, -k * cu * cv), Vec3(0, 0, k * su * sv), Vec3(0, 0, -k * cu * cv)};
    }
    case SurfaceKind::BezierPatch: {
      const double h = 1e-6;
      const auto up = partials(u + h, v), um = partials(u - h, v);
      const auto vp = partials(u, v + h), vm = partials(u, v - h);
      return {(up.du - um.du) / (2 * h), (vp.du - vm.du) / (2 * h), (vp.dv - vm.dv) / (2 * h)};
    }
    default:
      return {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  }
}

SurfaceNormal Surface::normal(double u, double v) const {
  const auto d = partials(u, v);
  SurfaceNormal n;
  n.raw = d.du.cross(d.dv);
  const double len = n.raw.norm();
  if (!(len > 1e-12)) {
    throw DegenerateSurfaceError("degenerate surface normal at (" + std::to_string(u) + ", " +
                                 std::to_string(v) + ")");
  }
  n.unit = n.raw / len;
  return n;
}

UnitNormalPartials Surface::unit_normal_partials(double u, double v) const {
  if (kind_ == SurfaceKind::Plane) return {};
  if (kind_ == SurfaceKind::BezierPatch) {
    constexpr double h = 1e-6;
    return {(normal(u + h, v).unit - normal(u - h, v).unit) / (2 * h),
            (normal(u, v + h).unit - normal(u, v - h).unit) / (2 * h)};
  }
  const auto d = partials(u, v);
  const auto dd = second_partials(u, v);
  const Vec3 raw = d.du.cross(d.dv);
  const double len = raw.norm();
  if (!(len > 1e-12)) throw DegenerateSurfaceError("degenerate surface normal");
  const Vec3 unit = raw / len;
  const Vec3 draw_u = dd.uu.cross(d.dv) + d.du.cross(dd.uv);
  const Vec3 draw_v = dd.uv.cross(d.dv) + d.du.cross(dd.vv);
  // d(n/|n|) = (I - n n^T) dn / |n|
  return {(draw_u - unit * unit.dot(draw_u)) / len, (draw_v - unit * unit.dot(draw_v)) / len};
}

double Surface::min_normal_norm(int n) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = domain_.u_min + (domain_.u_max - domain_.u_min) * i / (n - 1);
      const double v = domain_.v_min + (domain_.v_max - domain_.v_min) * j / (n - 1);
      const auto d = partials(u, v);
      best = std::min(best, d.du.cross(d.dv).norm());
    }
  }
  return best;
}

SurfaceCoords Surface::closest_point(const Vec3& p) const {
  constexpr int kSeedGrid = 32;
  constexpr int kStarts = 4;
  constexpr int kMaxIters = 50;
  constexpr double kStepTol = 1e-10;

  struct Candidate {
    double dist2;
    double u, v;
  };
  std::vector<Candidate> seeds;
  seeds.reserve(kSeedGrid * kSeedGrid);
  for (int i = 0; i < kSeedGrid; ++i) {
    for (int j = 0; j < kSeedGrid; ++j) {
      const double u = domain_.u_min + (domain_.u_max - domain_.u_min) * i / (kSeedGrid - 1);
      const double v = domain_.v_min + (domain_.v_max - domain_.v_min) * j / (kSeedGrid - 1);
      seeds.push_back({(eval(u, v) - p).squaredNorm(), u, v});
    }
  }
  std::partial_sort(seeds.begin(), seeds.begin() + kStarts, seeds.end(),
                    [](const Candidate& a, const Candidate& b) { return a.dist2 < b.dist2; });

  Candidate best = seeds.front();
  for (int s = 0; s < kStarts; ++s) {
    double u = seeds[static_cast<std::size_t>(s)].u;
    double v = seeds[static_cast<std::size_t>(s)].v;
    double f = seeds[static_cast<std::size_t>(s)].dist2;
    for (int it = 0; it < kMaxIters; ++it) {
      // Newton on f = |S - p|^2 / 2 with the curvature term, restricted to the coordinates
      // not pinned against a domain bound.
      const Vec3 r = eval(u, v) - p;
      const auto d = partials(u, v);
      const Second dd = second_partials(u, v);
      const Eigen::Vector2d g(d.du.dot(r), d.dv.dot(r));
      Eigen::Matrix2d h;
      h(0, 0) = d.du.dot(d.du) + dd.uu.dot(r);
      h(0, 1) = h(1, 0) = d.du.dot(d.dv) + dd.uv.dot(r);
      h(1, 1) = d.dv.dot(d.dv) + dd.vv.dot(r);
      const bool pin_u = (u <= domain_.u_min && g.x() > 0) || (u >= domain_.u_max && g.x() < 0);
      const bool pin_v = (v <= domain_.v_min && g.y() > 0) || (v >= domain_.v_max && g.y() < 0);
      Eigen::Vector2d step = -g;
      if (pin_u) step.x() = 0;
      if (pin_v) step.y() = 0;
      if (!pin_u && !pin_v) {
        const Eigen::LDLT<Eigen::Matrix2d> ldlt(h);
        if (ldlt.isPositive() && ldlt.info() == Eigen::Success && h.determinant() > 1e-14) {
          step = -ldlt.solve(g);
        }
      } else if (!pin_u && h(0, 0) > 1e-14) {
        step.x() = -g.x() / h(0, 0);
      } else if (!pin_v && h(1, 1) > 1e-14) {
        step.y() = -g.y() / h(1, 1);
      }
      if (step.norm() < kStepTol) break;
      double alpha = 1.0;
      bool improved = false;
      double nu = u, nv = v, nf = f;
      for (int halving = 0; halving < 30; ++halving) {
        nu = domain_.clamp_u(u + alpha * step.x());
        nv = domain_.clamp_v(v + alpha * step.y());
        nf = (eval(nu, nv) - p).squaredNorm();
        if (nf < f) {
          improved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!improved) break;
      const double moved = std::hypot(nu - u, nv - v);
      u = nu;
      v = nv;
      f = nf;
      if (moved < kStepTol) break;
    }
    if (f < best.dist2) best = {f, u, v};
  }
  return {best.u, best.v};
}

}  // namespace surfcov
