#include "surfcov/errors.hpp"
#include "surfcov/explorers.hpp"
#include "surfcov/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace surfcov;

namespace {

template <class T>
py::array_t<T> square(const std::vector<T>& flat, int n) {
  py::array_t<T> out({n, n});
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

template <class T>
std::vector<T> flatten(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw py::value_error("expected a square 2-D array");
  return std::vector<T>(a.data(), a.data() + a.size());
}

ExtendedConfig state(const VecX& q, double u, double v) { return ExtendedConfig(q, u, v); }

py::tuple unpack(const ExtendedConfig& x) { return py::make_tuple(x.q(), x.u(), x.v()); }

ExplorerParams make_params(const Scenario& sc, std::uint64_t samples, std::uint64_t seed,
                           const py::kwargs& overrides) {
  ExplorerParams p = sc.defaults;
  p.max_samples = samples;
  p.seed = seed;
  for (const auto& [key, value] : overrides) {
    const auto name = key.cast<std::string>();
    if (name == "time_limit") {
      p.time_limit_s = value.cast<double>();
    } else if (name == "target_cells") {
      p.target_cells = value.cast<std::size_t>();
    } else {
      set_parameter(p, name, value.cast<double>());
    }
  }
  p.validate();
  return p;
}

py::dict run_to_dict(const RunResult& r) {
  const int n = r.coverage.n_grid();
  py::dict rejected;
  for (std::size_t k = 0; k < kRejectReasonCount; ++k) {
    rejected[to_string(static_cast<RejectReason>(k))] = r.rejected[k];
  }
  py::list series;
  for (const auto& s : r.series) series.append(py::make_tuple(s.iteration, s.elapsed_s, s.covered_cells));
  py::dict d;
  d["scenario"] = r.scenario;
  d["algorithm"] = to_string(r.algorithm);
  d["seed"] = r.params.seed;
  d["iterations"] = r.iterations;
  d["accepted"] = r.accepted;
  d["rejected"] = rejected;
  d["covered_cells"] = r.coverage.covered_count();
  d["structure_size"] = r.structure_size;
  d["charts"] = r.charts;
  d["wall_s"] = r.wall_s;
  d["accepted_per_s"] = r.accepted_per_s;
  d["series"] = series;
  d["visits"] = square(r.coverage.visit_matrix(), n);
  d["order"] = square(r.coverage.order_matrix(), n);
  return d;
}

}  // namespace

PYBIND11_MODULE(_surfcov, m) {
  m.doc() = "Continuous surface-coverage estimation for robot arms.";

  auto base = py::register_exception<Error>(m, "SurfcovError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InitializationError>(m, "InitializationError", base.ptr());
  py::register_exception<ProjectionFailure>(m, "ProjectionFailure", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  py::class_<Scenario, std::unique_ptr<Scenario>>(m, "Scenario")
      .def_static("load", [](const fs::path& p) { return parse_scenario(p); }, py::arg("path"))
      .def_static("from_text", [](const std::string& t) { return parse_scenario_text(t); }, py::arg("text"))
      .def_readonly("name", &Scenario::name)
      .def_readonly("n_grid", &Scenario::n_grid)
      .def_readonly("q0", &Scenario::q0)
      .def_property_readonly("dof", [](const Scenario& s) { return s.robot().dof(); })
      .def_property_readonly("domain", [](const Scenario& s) {
        const auto& d = s.surface().domain();
        return py::make_tuple(d.u_min, d.u_max, d.v_min, d.v_max);
      })
      .def("constraint", [](const Scenario& s, const VecX& q, double u, double v) {
        return VecX(s.system.constraint(state(q, u, v)));
      }, py::arg("q"), py::arg("u"), py::arg("v"))
      .def("jacobian", [](const Scenario& s, const VecX& q, double u, double v) {
        return MatX(s.system.jacobian(state(q, u, v)));
      }, py::arg("q"), py::arg("u"), py::arg("v"))
      .def("project", [](const Scenario& s, const VecX& q, double u, double v) {
        return unpack(s.system.project(state(q, u, v)));
      }, py::arg("q"), py::arg("u"), py::arg("v"), "Returns (q, u, v) on the constraint manifold.")
      .def("alignment_sign", [](const Scenario& s, const VecX& q, double u, double v) {
        return s.system.alignment_sign(state(q, u, v));
      }, py::arg("q"), py::arg("u"), py::arg("v"))
      .def("state_valid", [](const Scenario& s, const VecX& q, double u, double v) {
        return state_valid(s.system, s.world, state(q, u, v));
      }, py::arg("q"), py::arg("u"), py::arg("v"))
      .def("root", [](const Scenario& s) { return unpack(init_root(s.system, s.world, s.q0)); });

  m.def("explore", [](const Scenario& sc, const std::string& algo, std::uint64_t samples,
                      std::uint64_t seed, const py::kwargs& kw) {
    const Algorithm a = parse_algorithm(algo);
    const ExplorerParams p = make_params(sc, samples, seed, kw);
    const RunResult r = [&] {
      py::gil_scoped_release release;
      return run_exploration(a, sc, p);
    }();
    return run_to_dict(r);
  }, py::arg("scenario"), py::arg("algo"), py::arg("samples"), py::arg("seed") = 1,
        "Runs 'rrt' or 'biased' exploration. Keyword overrides: d_max, sigma, delta_check, "
        "exterior_bias, time_limit, target_cells.");

  m.def("explore_to_dir", [](const Scenario& sc, const std::string& algo, std::uint64_t samples,
                             std::uint64_t seed, const fs::path& out, const py::kwargs& kw) {
    const Algorithm a = parse_algorithm(algo);
    const ExplorerParams p = make_params(sc, samples, seed, kw);
    const RunResult r = [&] {
      py::gil_scoped_release release;
      return cmd_explore(sc, a, p, out);
    }();
    return run_to_dict(r);
  }, py::arg("scenario"), py::arg("algo"), py::arg("samples"), py::arg("seed"), py::arg("out_dir"));

  m.def("baseline", [](const Scenario& sc, std::uint64_t samples, std::uint64_t seed, int jobs) {
    BaselineSet b;
    {
      py::gil_scoped_release release;
      b = exhaustive_baseline(sc.system, sc.world, sc.n_grid, samples, seed, jobs);
    }
    return py::make_tuple(square(b.reachable, b.n_grid), b.accepted_count);
  }, py::arg("scenario"), py::arg("samples"), py::arg("seed") = 1, py::arg("jobs") = 1,
        "Returns (reachable n×n uint8 array, accepted sample count).");

  m.def("baseline_to_dir", [](const Scenario& sc, std::uint64_t samples, std::uint64_t seed,
                              const fs::path& out, int jobs) {
    BaselineSet b;
    {
      py::gil_scoped_release release;
      b = cmd_baseline(sc, samples, seed, out, jobs);
    }
    return square(b.reachable, b.n_grid);
  }, py::arg("scenario"), py::arg("samples"), py::arg("seed"), py::arg("out_dir"), py::arg("jobs") = 1);

  m.def("report", [](const fs::path& run_dir, const fs::path& baseline_dir) {
    const Report r = cmd_report(run_dir, baseline_dir);
    py::dict d;
    d["coverage_pct"] = r.coverage_pct;
    d["covered_cells"] = r.covered_cells;
    d["reachable_cells"] = r.reachable_cells;
    d["covered_reachable"] = r.covered_reachable;
    d["summary"] = r.summary_line;
    return d;
  }, py::arg("run_dir"), py::arg("baseline_dir"));

  m.def("coverage_fraction", [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& visits,
                                const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& reachable) {
    BaselineSet b;
    b.reachable = flatten(reachable);
    b.n_grid = static_cast<int>(reachable.shape(0));
    return coverage_fraction(flatten(visits), b);
  }, py::arg("visits"), py::arg("reachable"), "Percentage of reachable cells with at least one visit.");

  m.def("importance", &importance, py::arg("first_iteration"), py::arg("score"), py::arg("expansions"),
        py::arg("neighbors"), py::arg("coverage"));
}
