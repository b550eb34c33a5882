#include "surfcov/atlas.hpp"

#include "surfcov/errors.hpp"

#include <cmath>

namespace surfcov {

namespace {

constexpr double kRankTolerance = 1e-6;

struct NullSpace {
  MatX basis;
  MatX row_space;
};

NullSpace null_space(const ConstraintSystem& sys, const ExtendedConfig& x) {
  const MatX jac = sys.jacobian(x);
  Eigen::JacobiSVD<MatX> svd(jac, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[4] <= kRankTolerance * sv[0]) {
    throw SingularityError("constraint Jacobian has more than n-3 near-zero singular values");
  }
  const auto k = sys.manifold_dim();
  return {svd.matrixV().rightCols(k), svd.matrixV().leftCols(5)};
}

VecX gaussian_vector(Eigen::Index k, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  VecX g(k);
  for (Eigen::Index i = 0; i < k; ++i) g[i] = normal(rng);
  return g;
}

}  // namespace

Chart make_chart(const ConstraintSystem& sys, const ExtendedConfig& anchor, int id) {
  Chart c;
  c.id = id;
  c.anchor = anchor;
  c.basis = null_space(sys, anchor).basis;
  return c;
}

ExtendedConfig to_ambient(const ConstraintSystem& sys, const Chart& chart, const VecX& y) {
  if (y.size() == 0 || y.isZero(0.0)) return chart.anchor;
  ExtendedConfig x(chart.linear_point(y));
  x = sys.project(std::move(x));
  x.chart = chart.id;
  return x;
}

Atlas::Atlas(const ConstraintSystem& sys, AtlasParams params) : sys_(&sys), params_(params) {
  if (!(params_.rho > 0) || !(params_.epsilon > 0) || !(params_.alpha > 0) ||
      !(params_.geodesic_step > 0) || params_.sample_retries < 1) {
    throw ValidationError("atlas parameters must be positive");
  }
}

const Chart& Atlas::chart(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= charts_.size()) {
    throw ContractViolation("chart id out of range");
  }
  return charts_[static_cast<std::size_t>(id)];
}

const Chart& Atlas::create_chart(const ExtendedConfig& anchor) {
  charts_.push_back(make_chart(*sys_, anchor, static_cast<int>(charts_.size())));
  charts_.back().anchor.chart = charts_.back().id;
  return charts_.back();
}

int Atlas::assign_chart(ExtendedConfig& x) {
  const NullSpace ns = null_space(*sys_, x);
  if (x.chart >= 0 && static_cast<std::size_t>(x.chart) < charts_.size()) {
    const Chart& c = charts_[static_cast<std::size_t>(x.chart)];
    const VecX y = c.to_chart(x);
    const double deviation = (x.coords() - c.linear_point(y)).norm();
    // sin of the largest principal angle between the chart plane and the tangent space at x.
    const Eigen::JacobiSVD<MatX> angle_svd(ns.row_space.transpose() * c.basis);
    const double sin_angle = angle_svd.singularValues()[0];
    if (y.norm() <= params_.rho && deviation <= params_.epsilon &&
        sin_angle <= std::sin(params_.alpha)) {
      return x.chart;
    }
  }
  Chart c;
  c.id = static_cast<int>(charts_.size());
  c.anchor = x;
  c.anchor.chart = c.id;
  c.basis = ns.basis;
  charts_.push_back(std::move(c));
  x.chart = charts_.back().id;
  return x.chart;
}

ExtendedConfig Atlas::sample_uniform(Rng& rng) const {
  if (charts_.empty()) throw ContractViolation("sample_uniform on an empty atlas");
  const auto k = sys_->manifold_dim();
  std::uniform_int_distribution<std::size_t> pick(0, charts_.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < params_.sample_retries; ++attempt) {
    const Chart& c = charts_[pick(rng)];
    VecX y = gaussian_vector(k, 1.0, rng);
    const double len = y.norm();
    if (len == 0.0) continue;
    y *= params_.sample_radius_factor * params_.rho * std::pow(unit(rng), 1.0 / static_cast<double>(k)) / len;
    try {
      return to_ambient(*sys_, c, y);
    } catch (const ProjectionFailure&) {
    } catch (const SingularityError&) {
    } catch (const DegenerateSurfaceError&) {
    }
  }
  throw SampleFailure("uniform atlas sampling failed to project");
}

ExtendedConfig Atlas::sample_gaussian_near(ExtendedConfig& x, double sigma, Rng& rng) {
  if (!x.on_manifold) throw ContractViolation("sample_gaussian_near needs an on-manifold state");
  if (sigma == 0.0) return x;
  if (x.chart < 0) assign_chart(x);
  const Chart& c = chart(x.chart);
  const VecX g = gaussian_vector(sys_->manifold_dim(), sigma, rng);
  try {
    ExtendedConfig out = sys_->project(ExtendedConfig(VecX(x.coords() + c.basis * g)));
    out.chart = x.chart;
    return out;
  } catch (const ProjectionFailure& e) {
    throw SampleFailure(e.what());
  } catch (const SingularityError& e) {
    throw SampleFailure(e.what());
  } catch (const DegenerateSurfaceError& e) {
    throw SampleFailure(e.what());
  }
}

std::optional<Geodesic> walk_geodesic(const ConstraintSystem& sys, const AtlasParams& params,
                                      const ExtendedConfig& a, const ExtendedConfig& b, double step,
                                      const ValidityFn* validity) {
  if (!(step > 0)) throw ContractViolation("geodesic step must be positive");
  Geodesic path;
  path.states.push_back(a);
  path.cumulative.push_back(0.0);
  if (ambient_distance(a, b) == 0.0) return path;

  auto push = [&](ExtendedConfig s) {
    const double d = ambient_distance(path.states.back(), s);
    path.cumulative.push_back(path.cumulative.back() + d);
    path.states.push_back(std::move(s));
  };

  try {
    ExtendedConfig x = a;
    MatX basis = null_space(sys, x).basis;
    VecX anchor = x.coords();
    bool fresh = true;
    int stall = 0;
    const auto max_steps =
        static_cast<long>(std::ceil(10.0 * ambient_distance(a, b) / step)) + 100;
    for (long it = 0; it < max_steps; ++it) {
      const double d = ambient_distance(x, b);
      if (d <= step) {
        if (validity && !(*validity)(b)) return std::nullopt;
        push(b);
        return path;
      }
      const VecX yx = basis.transpose() * (x.coords() - anchor);
      const VecX dir = basis.transpose() * (b.coords() - anchor) - yx;
      const double dir_len = dir.norm();
      const VecX yn = yx + step * dir / std::max(dir_len, 1e-300);
      if (!fresh && (dir_len < 1e-12 || yn.norm() > params.rho)) {
        basis = null_space(sys, x).basis;
        anchor = x.coords();
        fresh = true;
        continue;
      }
      if (dir_len < 1e-12) return std::nullopt;
      const VecX lin = anchor + basis * yn;
      ExtendedConfig next = sys.project(ExtendedConfig(lin));
      if (!fresh && (next.coords() - lin).norm() > params.epsilon) {
        basis = null_space(sys, x).basis;
        anchor = x.coords();
        fresh = true;
        continue;
      }
      if (ambient_distance(x, next) > 2.0 * step) return std::nullopt;
      if (validity && !(*validity)(next)) return std::nullopt;
      const double nd = ambient_distance(next, b);
      if (nd >= d - 1e-12) {
        if (++stall >= 3) return std::nullopt;
      } else {
        stall = 0;
      }
      x = next;
      push(std::move(next));
      fresh = false;
    }
  } catch (const ProjectionFailure&) {
    return std::nullopt;
  } catch (const SingularityError&) {
    return std::nullopt;
  } catch (const DegenerateSurfaceError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

ExtendedConfig interpolate_along(const ConstraintSystem& sys, const Geodesic& path, double t) {
  if (path.states.empty()) throw ContractViolation("interpolate_along on an empty path");
  if (t <= 0.0 || path.states.size() == 1) return path.states.front();
  if (t >= 1.0) return path.states.back();
  const double target = t * path.length();
  std::size_t i = 1;
  while (i + 1 < path.cumulative.size() && path.cumulative[i] < target) ++i;
  const double seg = path.cumulative[i] - path.cumulative[i - 1];
  const double f = seg > 0 ? (target - path.cumulative[i - 1]) / seg : 0.0;
  const VecX lin = (1.0 - f) * path.states[i - 1].coords() + f * path.states[i].coords();
  try {
    return sys.project(ExtendedConfig(lin));
  } catch (const Error& e) {
    throw InterpolationFailure(std::string("interpolated state does not project: ") + e.what());
  }
}

ExtendedConfig geodesic_interpolate(const ConstraintSystem& sys, const AtlasParams& params,
                                    const ExtendedConfig& a, const ExtendedConfig& b, double t) {
  if (t < 0.0 || t > 1.0) throw ContractViolation("interpolation fraction must lie in [0, 1]");
  if (t == 0.0) return a;
  const auto path = walk_geodesic(sys, params, a, b, params.geodesic_step);
  if (!path) throw InterpolationFailure("geodesic traversal stalled");
  return interpolate_along(sys, *path, t);
}

bool check_transition(const ConstraintSystem& sys, const AtlasParams& params,
                      const ExtendedConfig& a, const ExtendedConfig& b, double step,
                      const ValidityFn& validity, Geodesic* path_out) {
  auto path = walk_geodesic(sys, params, a, b, step, &validity);
  if (!path) return false;
  if (path_out) *path_out = std::move(*path);
  return true;
}

}  // namespace surfcov
