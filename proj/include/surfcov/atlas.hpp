#pragma once

#include "surfcov/constraint.hpp"

#include <deque>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace surfcov {

using Rng = std::mt19937_64;

struct AtlasParams {
  double rho = 0.1;                        // chart validity radius
  double epsilon = 0.05;                   // max distance between manifold and chart plane
  double alpha = std::numbers::pi / 8;     // max angle between a chart and the local tangent space
  double geodesic_step = 0.01;             // traversal step for geodesic interpolation
  double sample_radius_factor = 2.0;     // uniform samples lie within factor * rho of an anchor
  int sample_retries = 10;
};

/// Tangent-space parametrization of the manifold around an on-manifold anchor.
struct Chart {
  int id = -1;
  ExtendedConfig anchor;
  MatX basis;  // (n + 2) x (n - 3), orthonormal columns spanning null(J_C(anchor))

  VecX to_chart(const ExtendedConfig& x) const { return basis.transpose() * (x.coords() - anchor.coords()); }
  VecX linear_point(const VecX& y) const { return anchor.coords() + basis * y; }
};

/// Builds a chart at `anchor`; throws SingularityError when J_C has fewer than 5
/// singular values above 1e-6 * sigma_max.
Chart make_chart(const ConstraintSystem& sys, const ExtendedConfig& anchor, int id = -1);

/// Projects anchor + basis * y back onto the manifold.
ExtendedConfig to_ambient(const ConstraintSystem& sys, const Chart& chart, const VecX& y);

/// Append-only collection of charts owned by one exploration run.
class Atlas {
 public:
  Atlas(const ConstraintSystem& sys, AtlasParams params);

  const AtlasParams& params() const { return params_; }
  const ConstraintSystem& system() const { return *sys_; }
  std::size_t size() const { return charts_.size(); }
  bool empty() const { return charts_.empty(); }
  const Chart& chart(int id) const;

  const Chart& create_chart(const ExtendedConfig& anchor);

  /// Keeps x.chart when that chart still parametrizes x well (inside rho, within epsilon of
  /// the chart plane, tangent angle below alpha); otherwise anchors a new chart at x.
  int assign_chart(ExtendedConfig& x);

  /// Uniform chart, uniform point of the ball of radius sample_radius_factor * rho in it,
  /// projected. Throws SampleFailure after
  /// `sample_retries` failed projections.
  ExtendedConfig sample_uniform(Rng& rng) const;

  /// x + basis * g with g ~ N(0, sigma^2 I) in x's chart, projected.
  ExtendedConfig sample_gaussian_near(ExtendedConfig& x, double sigma, Rng& rng);

 private:
  const ConstraintSystem* sys_;
  AtlasParams params_;
  std::deque<Chart> charts_;
};

/// Discrete on-manifold path between two states.
struct Geodesic {
  std::vector<ExtendedConfig> states;  // states.front() == a, states.back() == b
  std::vector<double> cumulative;      // arc length up to each state
  double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

using ValidityFn = std::function<bool(const ExtendedConfig&)>;

/// Walks from a toward b in steps of ambient length `step`, re-projecting every step and
/// switching to a fresh local chart when the current one stops being a good approximation.
/// Returns nullopt on projection failure, a step longer than 2 * step, an invalid state
/// (when `validity` is given), or 3 consecutive steps without progress.
std::optional<Geodesic> walk_geodesic(const ConstraintSystem& sys, const AtlasParams& params,
                                      const ExtendedConfig& a, const ExtendedConfig& b, double step,
                                      const ValidityFn* validity = nullptr);

/// State at fraction t of the path's arc length.
ExtendedConfig interpolate_along(const ConstraintSystem& sys, const Geodesic& path, double t);

/// Throws InterpolationFailure when the traversal stalls.
ExtendedConfig geodesic_interpolate(const ConstraintSystem& sys, const AtlasParams& params,
                                    const ExtendedConfig& a, const ExtendedConfig& b, double t);

/// True iff the geodesic from a to b can be walked in steps of at most `step` with every
/// intermediate state (and b) passing `validity`.
bool check_transition(const ConstraintSystem& sys, const AtlasParams& params,
                      const ExtendedConfig& a, const ExtendedConfig& b, double step,
                      const ValidityFn& validity, Geodesic* path_out = nullptr);

}  // namespace surfcov
