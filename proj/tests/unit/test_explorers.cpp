#include "helpers.hpp"

#include "surfcov/explorers.hpp"

#include <doctest.h>

#include <cmath>

using namespace surfcov;
using namespace testutil;

namespace {

ValidityFn validity_of(const Scenario& sc) {
  return [&sc](const ExtendedConfig& x) { return state_valid(sc.system, sc.world, x); };
}

ExplorerParams budget(std::uint64_t samples, std::uint64_t seed = 1) {
  ExplorerParams p;
  p.max_samples = samples;
  p.seed = seed;
  return p;
}

// Far side of the gantry wall: cell rows whose surface points lie beyond the box.
std::size_t far_side_covered(const Scenario& sc, const CoverageGrid& g) {
  std::size_t n = 0;
  for (const auto& c : g.covered_cells()) {
    const double v = -0.5 + (c.j + 0.5) / sc.n_grid;
    if (v > 0.12) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("explorers") {
  TEST_CASE("root of an on-manifold start is the start itself") {
    const auto sys = gantry_plane_system();
    const CollisionWorld empty(std::vector<Primitive>{});
    const auto root = init_root(sys, empty, vec({0.2, -0.1, 0, 0, 0, 0}));
    CHECK((root.q() - vec({0.2, -0.1, 0, 0, 0, 0})).norm() < 1e-12);
    CHECK(root.u() == doctest::Approx(0.2));
    CHECK(root.v() == doctest::Approx(-0.1));
  }

  TEST_CASE("hovering start is pulled onto the surface by a minimum-norm step") {
    const auto sys = gantry_plane_system();
    const CollisionWorld empty(std::vector<Primitive>{});
    const VecX q0 = vec({0.2, -0.1, 0.05, 0, 0, 0});
    const auto root = init_root(sys, empty, q0);
    // The gantry-on-plane constraint is affine, so one least-squares step is exact.
    const ExtendedConfig start(q0, 0.2, -0.1);
    const MatX jac = sys.jacobian(start);
    const VecX step = jac.completeOrthogonalDecomposition().solve(VecX(-sys.constraint(start)));
    const VecX expected = start.coords() + step;
    CHECK((root.coords() - expected).norm() < 1e-9);
    CHECK(root.q()[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sys.constraint(root).lpNorm<Eigen::Infinity>() <= 1e-6);
  }

  TEST_CASE("start that projects into an obstacle fails to initialize") {
    const auto sc = parse_scenario(scenario_path("gantry_wall"));
    CHECK_THROWS_AS(init_root(sc->system, sc->world, vec({0, 0.1, 0, 0, 0, 0})), InitializationError);
    VecX beyond = sc->q0;
    beyond[0] = 10.0;
    CHECK_THROWS_AS(init_root(sc->system, sc->world, beyond), InitializationError);
  }

  TEST_CASE("start with the tool axis against the normal fails to initialize") {
    const auto sys = gantry_plane_system();
    const CollisionWorld empty(std::vector<Primitive>{});
    CHECK_THROWS_AS(init_root(sys, empty, vec({0, 0, 0, 0, kPi, 0})), InitializationError);
  }

  TEST_CASE("nearest neighbour agrees with a linear scan") {
    NearestNeighborIndex single(3);
    single.insert(Vec3(1, 2, 3));
    CHECK(single.nearest(Vec3(9, 9, 9)).first == 0);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int dim = 8;
    NearestNeighborIndex idx(dim);
    std::vector<VecX> pts;
    for (int k = 0; k < 1000; ++k) {
      VecX p(dim);
      for (int d = 0; d < dim; ++d) p[d] = unit(rng);
      pts.push_back(p);
      idx.insert(p);
    }
    const auto hit = idx.nearest(pts[417]);
    CHECK(hit.first == 417);
    CHECK(hit.second == 0.0);
    for (int t = 0; t < 500; ++t) {
      VecX q(dim);
      for (int d = 0; d < dim; ++d) q[d] = 1.2 * unit(rng);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double d = (pts[k] - q).norm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      const auto got = idx.nearest(q);
      CHECK(got.first == best);
      CHECK(got.second == doctest::Approx(best_d).epsilon(1e-12));
    }

    NearestNeighborIndex dup(2);
    dup.insert(Eigen::Vector2d(0, 0));
    dup.insert(Eigen::Vector2d(1, 0));
    dup.insert(Eigen::Vector2d(1, 0));
    CHECK(dup.nearest(Eigen::Vector2d(0.9, 0)).first == 1);
    CHECK(dup.nearest(Eigen::Vector2d(0.5, 0)).first == 0);
    CHECK_THROWS_AS(NearestNeighborIndex(2).nearest(Eigen::Vector2d(0, 0)), ContractViolation);
  }

  TEST_CASE("importance examples") {
    CHECK(importance(10, 1.0, 2, 3, 5) == doctest::Approx(std::log(10.0) / 40.0).epsilon(1e-12));
    CHECK(importance(10, 1.0, 2, 3, 10) == doctest::Approx(0.5 * importance(10, 1.0, 2, 3, 5)));
    CHECK(importance(7, 0.5, 0, 2, 3) == doctest::Approx(std::log(7.0) * 0.5 / (3.0 * 3.0)));
    CHECK(importance(7, 0.5, 0, 2, 3) == importance(7, 0.5, 1, 2, 3));
    CHECK(importance(2, 1.0, 0, 0, 1) > 0.0);
  }

  TEST_CASE("bias grid bookkeeping") {
    const Domain dom{0, 1, 0, 1};
    Rng rng(3);
    BiasGrid g(dom, 4, 0.75);
    CHECK(g.add(0, 0.1, 0.1, 2, rng));
    for (int k = 0; k < 50; ++k) {
      const auto s = g.select(rng);
      CHECK(s.cell == 0);
      CHECK(s.state == 0);
    }
    CHECK_FALSE(g.add(1, 0.15, 0.2, 3, rng));
    CHECK(g.cells()[0].coverage == 2);
    CHECK(g.cells()[0].states.size() == 2);
    CHECK(g.add(2, 0.3, 0.1, 4, rng));
    const auto& fresh = g.cells()[1];
    CHECK_FALSE(fresh.interior);
    CHECK(fresh.first_iteration == 4);
    CHECK(fresh.neighbors == 1);
    CHECK(g.cells()[0].neighbors == 1);

    g.penalize(1);
    CHECK(g.cells()[1].score == 0.5);
    for (int k = 0; k < 40; ++k) g.penalize(1);
    CHECK(g.cells()[1].score == BiasGrid::kScoreFloor);
  }

  TEST_CASE("interior flag needs all four neighbours") {
    const Domain dom{0, 1, 0, 1};
    Rng rng(1);
    BiasGrid g(dom, 5, 0.75);
    std::size_t id = 0;
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) g.add(id++, (i + 0.5) / 5, (j + 0.5) / 5, id + 2, rng);
    }
    for (const auto& c : g.cells()) CHECK(c.interior == (c.index.i == 2 && c.index.j == 2));
    CHECK(g.exterior_count() == 8);
  }

  TEST_CASE("exterior cells are chosen about three times in four") {
    const Domain dom{0, 1, 0, 1};
    Rng rng(11);
    BiasGrid g(dom, 5, 0.75);
    std::size_t id = 0;
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) g.add(id++, (i + 0.5) / 5, (j + 0.5) / 5, id + 2, rng);
    }
    int exterior = 0;
    for (int k = 0; k < 10000; ++k) {
      const auto s = g.select(rng);
      CHECK(s.exterior_set == !g.cells()[s.cell].interior);
      exterior += s.exterior_set ? 1 : 0;
    }
    CHECK(exterior / 10000.0 == doctest::Approx(0.75).epsilon(0.02 / 0.75));
  }

  TEST_CASE("selection falls back and takes the argmax") {
    const Domain dom{0, 1, 0, 1};
    Rng rng(5);
    BiasGrid g(dom, 8, 0.75);
    g.add(0, 0.05, 0.05, 20, rng);
    g.add(1, 0.9, 0.9, 20, rng);
    g.penalize(0);
    g.penalize(0);  // importance 0.25x of the other cell
    CHECK(g.cells()[1].importance() == doctest::Approx(4.0 * g.cells()[0].importance()));
    for (int k = 0; k < 1000; ++k) {
      const auto s = g.select(rng);
      CHECK(s.exterior_set);
      CHECK(s.cell == 1);
    }

    BiasGrid tie(dom, 8, 0.75);
    tie.add(0, 0.9, 0.9, 5, rng);
    tie.add(1, 0.05, 0.05, 5, rng);
    CHECK(tie.select(rng).cell == 0);
  }

  TEST_CASE("zero budget records only the root") {
    const auto sc = parse_scenario(scenario_path("gantry_plane"));
    for (auto algo : {Algorithm::Rrt, Algorithm::Biased}) {
      const auto r = run_exploration(algo, *sc, budget(0), true);
      CHECK(r.iterations == 0);
      CHECK(r.states.size() == 1);
      CHECK(r.coverage.covered_count() == 1);
    }
  }

  TEST_CASE("biased exploration covers the open gantry plane") {
    const auto sc = parse_scenario(scenario_path("gantry_plane"));
    const auto r = run_biased(*sc, budget(5000));
    // Analytic gantry IK reaches every cell of the open plane.
    CHECK(r.coverage.covered_count() == static_cast<std::size_t>(sc->n_grid * sc->n_grid));
  }

  TEST_CASE("rrt extensions respect the clamp and the tree shape") {
    const auto sc = parse_scenario(scenario_path("gantry_curved"));
    const auto p = budget(1500);
    const auto r = run_rrt(*sc, p, true);
    REQUIRE(r.states.size() > 50);
    CHECK(r.states[0].parent == -1);
    for (std::size_t k = 1; k < r.states.size(); ++k) {
      const auto& n = r.states[k];
      REQUIRE(n.parent >= 0);
      CHECK(static_cast<std::size_t>(n.parent) < k);
      CHECK(ambient_distance(r.states[static_cast<std::size_t>(n.parent)].state, n.state) <=
            p.d_max + 1e-6);
    }
  }

  TEST_CASE("neither explorer crosses the wall") {
    const auto sc = parse_scenario(scenario_path("gantry_wall"));
    for (auto algo : {Algorithm::Rrt, Algorithm::Biased}) {
      const auto r = run_exploration(algo, *sc, budget(6000));
      CHECK(r.coverage.covered_count() > 100);
      CHECK(far_side_covered(*sc, r.coverage) == 0);
    }
  }

  TEST_CASE("recorded states are sound and keep the root orientation") {
    for (const char* name : {"gantry_maze", "articulated6_curved", "articulated7_plane"}) {
      const std::string label = name;
      CAPTURE(label);
      const auto sc = parse_scenario(scenario_path(name));
      const auto valid = validity_of(*sc);
      for (auto algo : {Algorithm::Rrt, Algorithm::Biased}) {
        const auto r = run_exploration(algo, *sc, budget(800), true);
        CoverageGrid rebuilt(sc->surface().domain(), sc->n_grid);
        std::uint64_t stamp = 1;
        for (const auto& s : r.states) {
          CHECK(sc->system.constraint(s.state).lpNorm<Eigen::Infinity>() <= 1e-6);
          CHECK(valid(s.state));
          CHECK(sc->system.alignment_sign(s.state) == 1);
          rebuilt.record_visit(s.state, stamp++);
        }
        CHECK(rebuilt.visit_matrix() == r.coverage.visit_matrix());
        // Re-validate a spread of edges.
        for (std::size_t k = 1; k < r.states.size(); k += 7) {
          const auto& n = r.states[k];
          CHECK(check_transition(sc->system, sc->atlas, r.states[static_cast<std::size_t>(n.parent)].state,
                                 n.state, r.params.delta_check, valid));
        }
      }
    }
  }

  TEST_CASE("coverage series is monotone") {
    const auto sc = parse_scenario(scenario_path("gantry_curved"));
    for (auto algo : {Algorithm::Rrt, Algorithm::Biased}) {
      const auto r = run_exploration(algo, *sc, budget(2000));
      REQUIRE(r.series.size() >= 2);
      CHECK(r.series.front().iteration == 0);
      CHECK(r.series.back().iteration == r.iterations);
      CHECK(r.series.back().covered_cells == r.coverage.covered_count());
      for (std::size_t k = 1; k < r.series.size(); ++k) {
        CHECK(r.series[k].iteration > r.series[k - 1].iteration);
        CHECK(r.series[k].covered_cells >= r.series[k - 1].covered_cells);
      }
      CHECK(r.accepted + r.rejected[0] + r.rejected[1] + r.rejected[2] == r.iterations);
    }
  }

  TEST_CASE("first visits follow iteration order") {
    const auto sc = parse_scenario(scenario_path("gantry_plane"));
    const auto r = run_biased(*sc, budget(1500), true);
    const auto& dom = sc->surface().domain();
    for (const auto& s : r.states) {
      const auto c = cell_index(dom, sc->n_grid, s.state.u(), s.state.v());
      CHECK(r.coverage.first_visit(c.i, c.j) <= s.iteration + 1);
    }
  }

  TEST_CASE("biased step scoring") {
    const auto sc = parse_scenario(scenario_path("gantry_wall"));
    BiasedExplorer ex(*sc, budget(0));
    for (int it = 0; it < 400; ++it) {
      const auto before = ex.grid().cells();
      std::uint64_t expansions_before = 0;
      for (const auto& c : before) expansions_before += c.expansions;
      const StepResult s = ex.step();
      const auto& after = ex.grid().cells();
      std::uint64_t expansions_after = 0;
      for (const auto& c : after) expansions_after += c.expansions;
      CHECK(expansions_after == expansions_before + 1);
      const bool new_cell = after.size() > before.size();
      int halved = 0, changed = 0;
      for (std::size_t k = 0; k < before.size(); ++k) {
        if (after[k].score != before[k].score) ++changed;
        if (after[k].score == std::max(0.5 * before[k].score, BiasGrid::kScoreFloor) &&
            after[k].expansions == before[k].expansions + 1) {
          ++halved;
        }
      }
      if (s.accepted && new_cell) {
        CHECK(changed == 0);
        CHECK(after.back().interior == (after.back().neighbors == 4));
        CHECK(after.back().first_iteration == ex.iteration() + 2);  // root cell holds I = 2
      } else {
        CHECK(changed <= 1);
        CHECK(halved == 1);
      }
    }
  }

  TEST_CASE("runs are deterministic per seed") {
    const auto sc = parse_scenario(scenario_path("articulated6_maze"));
    for (auto algo : {Algorithm::Rrt, Algorithm::Biased}) {
      const auto a = run_exploration(algo, *sc, budget(700, 9), true);
      const auto b = run_exploration(algo, *sc, budget(700, 9), true);
      const auto c = run_exploration(algo, *sc, budget(700, 10), true);
      CHECK(a.coverage.visit_matrix() == b.coverage.visit_matrix());
      CHECK(a.coverage.order_matrix() == b.coverage.order_matrix());
      CHECK(a.rejected == b.rejected);
      CHECK(a.accepted == b.accepted);
      CHECK(a.structure_size == b.structure_size);
      REQUIRE(a.states.size() == b.states.size());
      for (std::size_t k = 0; k < a.states.size(); ++k) {
        CHECK(a.states[k].state.coords() == b.states[k].state.coords());
      }
      CHECK(a.states.size() != c.states.size());
    }
  }
}
