#include "helpers.hpp"

#include "surfcov/errors.hpp"

#include <doctest.h>

using namespace surfcov;
using namespace testutil;

namespace {

MatX fd_jacobian(const ConstraintSystem& sys, const ExtendedConfig& x, double h) {
  MatX j(5, x.coords().size());
  for (Eigen::Index c = 0; c < x.coords().size(); ++c) {
    ExtendedConfig p = x, m = x;
    p.coords()[c] += h;
    m.coords()[c] -= h;
    j.col(c) = (sys.constraint(p) - sys.constraint(m)) / (2 * h);
  }
  return j;
}

int rank_above(const MatX& j, double rel) {
  const Eigen::JacobiSVD<MatX> svd(j);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) r += s[k] > rel * s[0] ? 1 : 0;
  return r;
}

}  // namespace

TEST_SUITE("constraint") {
  TEST_CASE("constraint examples on gantry6 and a plane") {
    const auto sys = gantry_plane_system();
    CHECK(sys.ambient_dim() == 8);
    CHECK(sys.manifold_dim() == 3);
    CHECK(sys.constraint(ExtendedConfig(vec({0.2, -0.1, 0, 0, 0, 0}), 0.2, -0.1)).norm() < 1e-15);

    Vec5 c = sys.constraint(ExtendedConfig(vec({0.1, 0, 0, 0, 0, 0}), 0, 0));
    CHECK((c - (Vec5() << 0.1, 0, 0, 0, 0).finished()).norm() < 1e-15);

    // Ry(pi/2)^T e_z = (-1, 0, 0).
    c = sys.constraint(ExtendedConfig(vec({0, 0, 0, 0, kPi / 2, 0}), 0, 0));
    CHECK((c - (Vec5() << 0, 0, 0, -1, 0).finished()).norm() < 1e-15);
  }

  TEST_CASE("Jacobian blocks on a flat surface") {
    const auto sys = gantry_plane_system();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> a(-1.5, 1.5), uv(-0.4, 0.4);
    for (int k = 0; k < 20; ++k) {
      const double u = uv(rng), v = uv(rng);
      const ExtendedConfig x(vec({u, v, 0, a(rng), 0, 0}), u, v);
      const Matrix5X j = sys.jacobian(x);
      CHECK((j.block(0, 0, 3, 3) - Mat3::Identity()).norm() < 1e-15);
      CHECK(j.block(0, 3, 3, 3).norm() < 1e-15);
      CHECK((j.block(0, 6, 3, 1) + Vec3::UnitX()).norm() < 1e-15);
      CHECK((j.block(0, 7, 3, 1) + Vec3::UnitY()).norm() < 1e-15);
      CHECK(j.block(3, 6, 2, 2).norm() < 1e-15);
    }
  }

  TEST_CASE("Jacobian matches central differences on every shipped scenario") {
    for (const char* name : kShippedScenarios) {
      CAPTURE(name);
      const auto sc = parse_scenario(scenario_path(name));
      std::mt19937_64 rng(17);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const ExtendedConfig x = random_ambient(sc->system, rng);
        const MatX fd = fd_jacobian(sc->system, x, 1e-6);
        const MatX an = sc->system.jacobian(x);
        worst = std::max(worst, (an - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff()));
      }
      CHECK(worst <= 1e-4);
    }
  }

  TEST_CASE("on-manifold input is returned unchanged") {
    const auto sys = gantry_plane_system();
    const ExtendedConfig x(vec({0.2, -0.1, 0, 0.3, 0, 0}), 0.2, -0.1);
    const ExtendedConfig p = sys.project(x);
    CHECK(p.coords() == x.coords());
    CHECK(p.on_manifold);
  }

  TEST_CASE("projection takes the minimum-norm step on a linear system") {
    const auto sys = gantry_plane_system();
    const ExtendedConfig x(vec({0.1, 0, 0.05, 0, 0, 0}), 0, 0);
    // Minimum-norm correction -J^+ C computed independently with a complete orthogonal
    // decomposition; the system is linear, so one step lands on the manifold.
    const MatX j = sys.jacobian(x);
    const VecX step = j.completeOrthogonalDecomposition().solve(VecX(sys.constraint(x)));
    const VecX expected = x.coords() - step;
    const VecX literal = (VecX(8) << 0.05, 0, 0, 0, 0, 0, 0.05, 0).finished();
    CHECK((expected - literal).norm() < 1e-12);
    const ExtendedConfig p = sys.project(x);
    CHECK((p.coords() - literal).norm() < 1e-12);
  }

  TEST_CASE("projection is idempotent and lands within tolerance") {
    for (const char* name : kShippedScenarios) {
      CAPTURE(name);
      const auto sc = parse_scenario(scenario_path(name));
      const auto states = random_on_manifold(sc->system, 30, 5);
      REQUIRE(states.size() == 30);
      for (const auto& x : states) {
        CHECK(sc->system.constraint(x).lpNorm<Eigen::Infinity>() <= 1e-6);
        CHECK(ambient_distance(sc->system.project(x), x) <= 1e-9);
      }
    }
  }

  TEST_CASE("projection far outside the Newton basin fails cleanly or succeeds") {
    const auto sys = gantry_system(Surface::sinusoid(Vec3::Zero(), 0.2, 40.0, {-0.5, 0.5, -0.5, 0.5}));
    std::mt19937_64 rng(3);
    int failures = 0;
    for (int k = 0; k < 50; ++k) {
      ExtendedConfig x = random_ambient(sys, rng);
      try {
        const ExtendedConfig p = sys.project(x);
        CHECK(sys.constraint(p).lpNorm<Eigen::Infinity>() <= 1e-6);
      } catch (const ProjectionFailure&) {
        ++failures;
      } catch (const SingularityError&) {
        ++failures;
      }
    }
    MESSAGE("projection failures: " << failures << " of 50");
  }

  TEST_CASE("ambient distance") {
    const ExtendedConfig a(vec({0.1, 0.2, 0, 0, 0, 0}), 0.1, 0.2);
    ExtendedConfig b = a;
    CHECK(ambient_distance(a, a) == 0.0);
    b.coords()[4] += 1.0;
    CHECK(ambient_distance(a, b) == doctest::Approx(1.0));
    b.coords()[7] -= 0.3;
    CHECK(ambient_distance(a, b) == ambient_distance(b, a));
  }

  TEST_CASE("alignment sign") {
    const auto sys = gantry_plane_system();
    CHECK(sys.alignment_sign(ExtendedConfig(vec({0, 0, 0, 0.4, 0, 0}), 0, 0)) == 1);
    const ExtendedConfig flipped(vec({0, 0, 0, 0, kPi, 0}), 0, 0);
    CHECK(sys.constraint(flipped).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK(sys.alignment_sign(flipped) == -1);
  }

  TEST_CASE("the constraint Jacobian has rank 5 on the manifold") {
    for (const char* name : kShippedScenarios) {
      CAPTURE(name);
      const auto sc = parse_scenario(scenario_path(name));
      const bool gantry = sc->robot().name() == "gantry6";
      const auto states = random_on_manifold(sc->system, 300, 23);
      int checked = 0;
      for (const auto& x : states) {
        if (checked == 100) break;
        if (gantry && std::abs(std::abs(x.q()[4]) - kPi / 2) < 0.1) continue;
        CHECK(rank_above(sc->system.jacobian(x), 1e-6) == 5);
        ++checked;
      }
      CHECK(checked == 100);
      CHECK(sc->system.ambient_dim() - 5 == sc->robot().dof() - 3);
    }
  }
}
