// Python bindings for the main operations: configuration, the limit solver,
// trajectory simulation, kernel estimation with data-driven bandwidths, and
// the study drivers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lexis/config.hpp"
#include "lexis/estimation.hpp"
#include "lexis/experiment.hpp"
#include "lexis/renewal.hpp"
#include "lexis/rng.hpp"
#include "lexis/simulate.hpp"

namespace py = pybind11;
using namespace lexis;

namespace {

GLConfig gl_of(const ExperimentConfig& cfg) {
  GLConfig gl;
  gl.c_star = cfg.c_star;
  gl.varpi = cfg.varpi.empty() ? 0.01 : cfg.varpi.front();
  gl.order_restrict_bivariate = cfg.order_restrict_bivariate;
  return gl;
}

BandwidthGrid grid_of(const ExperimentConfig& cfg, double scale_N) {
  if (cfg.grid_mode == "uniform") return uniform_grid(scale_N);
  return geometric_grid(scale_N, cfg.grid_points);
}

std::vector<DeathRecord> to_deaths(
    const std::vector<std::pair<double, double>>& rows) {
  std::vector<DeathRecord> out;
  out.reserve(rows.size());
  for (const auto& [t, a] : rows) out.push_back(DeathRecord{t, a});
  return out;
}

Target target_of(const std::string& name) {
  if (name == "density") return Target::density;
  if (name == "death_intensity") return Target::death_intensity;
  if (name == "death_rate") return Target::death_rate;
  throw std::invalid_argument("unknown target: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "age-structured birth-death simulation and nonparametric rate "
      "estimation";
  m.attr("__version__") = LEXIS_VERSION;

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("window_lo", &ModelParams::window_lo)
      .def_readwrite("window_hi", &ModelParams::window_hi)
      .def_readwrite("birth_amplitude", &ModelParams::birth_amplitude)
      .def_readwrite("death_scale", &ModelParams::death_scale)
      .def_readwrite("death_age_rate", &ModelParams::death_age_rate)
      .def_readwrite("death_time_rate", &ModelParams::death_time_rate)
      .def_readwrite("initial_mean", &ModelParams::initial_mean)
      .def_readwrite("initial_variance", &ModelParams::initial_variance)
      .def_readwrite("horizon", &ModelParams::horizon)
      .def_readwrite("max_age", &ModelParams::max_age);

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("N_list", &ExperimentConfig::N_list)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("density_points", &ExperimentConfig::density_points)
      .def_readwrite("death_points", &ExperimentConfig::death_points)
      .def_readwrite("ci_N", &ExperimentConfig::ci_N)
      .def_readwrite("varpi", &ExperimentConfig::varpi)
      .def_readwrite("grid_points", &ExperimentConfig::grid_points)
      .def_readwrite("grid_mode", &ExperimentConfig::grid_mode)
      .def_readwrite("c_star", &ExperimentConfig::c_star)
      .def_readwrite("order_restrict_bivariate",
                     &ExperimentConfig::order_restrict_bivariate)
      .def_readwrite("kernel_time", &ExperimentConfig::kernel_time)
      .def_readwrite("kernel_age", &ExperimentConfig::kernel_age)
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("snapshot_lattice", &ExperimentConfig::snapshot_lattice)
      .def_readwrite("conc_N", &ExperimentConfig::conc_N)
      .def_readwrite("conc_replications", &ExperimentConfig::conc_replications)
      .def_readwrite("conc_h", &ExperimentConfig::conc_h)
      .def_readwrite("conc_center_age", &ExperimentConfig::conc_center_age)
      .def_readwrite("u_max", &ExperimentConfig::u_max)
      .def_readwrite("u_points", &ExperimentConfig::u_points)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("gamma", &ExperimentConfig::gamma)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir);

  m.def("section5_preset", &section5_preset,
        "built-in study configuration");
  m.def(
      "load_config",
      [](const std::string& path, const ExperimentConfig& base) {
        return load_config(path, base);
      },
      py::arg("path"), py::arg("base") = ExperimentConfig{},
      "parse a JSON config file over a base configuration");
  m.def("config_to_json", &config_to_json, py::arg("config"));
  m.def("config_hash", &config_hash, py::arg("config"));
  m.def("validate_config", &validate_config, py::arg("config"));

  py::class_<RenewalSolution>(m, "LimitSolution")
      .def_property_readonly("dt", &RenewalSolution::dt)
      .def("birth", &RenewalSolution::birth_at, py::arg("t"),
           "renewal birth rate B(t)")
      .def(
          "density",
          [](const RenewalSolution& s, double t, double a) {
            return limit_density(s, t, a);
          },
          py::arg("t"), py::arg("a"), "limit age density g(t, a)")
      .def(
          "death_intensity",
          [](const RenewalSolution& s, double t, double a) {
            return limit_death_intensity(s, t, a);
          },
          py::arg("t"), py::arg("a"), "limit death numerator mu(t, a) g(t, a)");
  m.def(
      "solve_limit",
      [](const ExperimentConfig& cfg) {
        const Demography demo = build_model(cfg.model);
        return solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);
      },
      py::arg("config"), "solve the limit renewal equation at config.dt");

  py::class_<PopulationState>(m, "Snapshot")
      .def(py::init([](double time, std::vector<double> ages, double scale_N) {
             PopulationState s;
             s.time = time;
             s.ages = std::move(ages);
             s.scale_N = scale_N;
             return s;
           }),
           py::arg("time"), py::arg("ages"), py::arg("scale_N"))
      .def_readonly("time", &PopulationState::time)
      .def_readonly("ages", &PopulationState::ages)
      .def_readonly("scale_N", &PopulationState::scale_N)
      .def("__len__",
           [](const PopulationState& s) { return s.ages.size(); });

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("scale_N", &Trajectory::scale_N)
      .def_readonly("seed", &Trajectory::seed)
      .def_readonly("snapshots", &Trajectory::snapshots)
      .def_property_readonly("final_state",
                             [](const Trajectory& t) { return t.final_state; })
      .def_property_readonly(
          "deaths",
          [](const Trajectory& t) {
            std::vector<std::pair<double, double>> out;
            out.reserve(t.deaths.size());
            for (const auto& d : t.deaths) out.emplace_back(d.time, d.age);
            return out;
          },
          "death events as (time, age) pairs")
      .def_property_readonly(
          "birth_times",
          [](const Trajectory& t) { return t.birth_times; })
      .def_property_readonly(
          "n_events",
          [](const Trajectory& t) { return t.events.size(); });

  m.def(
      "simulate",
      [](const ExperimentConfig& cfg, long long n,
         const std::vector<double>& snapshot_times, std::uint64_t seed) {
        const Demography demo = build_model(cfg.model);
        const PopulationState init =
            sample_initial(demo.initial, n, derive_stream(seed, 0));
        return simulate(init, demo.rates, demo.domain, snapshot_times,
                        derive_stream(seed, 1));
      },
      py::arg("config"), py::arg("n"), py::arg("snapshot_times"),
      py::arg("seed"),
      "simulate one trajectory of the n-particle system by thinning");

  py::class_<EstimateReport>(m, "Selection")
      .def_readonly("value", &EstimateReport::value)
      .def_readonly("bandwidths", &EstimateReport::selected_bandwidths)
      .def_readonly("index", &EstimateReport::selected_index)
      .def_property_readonly("table", [](const EstimateReport& r) {
        std::vector<std::tuple<double, double, double, double, double>> out;
        out.reserve(r.rows.size());
        for (const auto& row : r.rows)
          out.emplace_back(row.h[0], row.h[1], row.estimate, row.A, row.V);
        return out;
      });

  m.def(
      "estimate_density",
      [](const PopulationState& snapshot, double h, double a,
         const std::string& kernel) {
        return estimate_density(snapshot, kernel_by_name(kernel), h, a);
      },
      py::arg("snapshot"), py::arg("h"), py::arg("a"),
      py::arg("kernel") = "epanechnikov",
      "fixed-bandwidth density estimate at age a");
  m.def(
      "gl_density",
      [](const PopulationState& snapshot, const ExperimentConfig& cfg,
         double t, double a) {
        return gl_select_density(snapshot, grid_of(cfg, snapshot.scale_N),
                                 kernel_by_name(cfg.kernel_age), gl_of(cfg), t,
                                 a);
      },
      py::arg("snapshot"), py::arg("config"), py::arg("t"), py::arg("a"),
      "data-driven density estimate at (t, a)");
  m.def(
      "gl_pi",
      [](const std::vector<std::pair<double, double>>& deaths, double scale_N,
         const ExperimentConfig& cfg, double t, double a) {
        const BandwidthGrid g = grid_of(cfg, scale_N);
        const SkewedProductKernel pk{kernel_by_name(cfg.kernel_time),
                                     kernel_by_name(cfg.kernel_age), true};
        return gl_select_pi(to_deaths(deaths), BandwidthGrid2{g, g}, pk,
                            gl_of(cfg), t, a, scale_N);
      },
      py::arg("deaths"), py::arg("scale_N"), py::arg("config"), py::arg("t"),
      py::arg("a"), "data-driven death-numerator estimate at (t, a)");
  m.def(
      "estimate_mu",
      [](const EstimateReport& g, const EstimateReport& pi, double varpi) {
        return estimate_mu(g, pi, varpi);
      },
      py::arg("density"), py::arg("numerator"), py::arg("varpi"),
      "quotient death-rate estimate with density floor");

  m.def(
      "theoretical_exponent",
      [](const std::string& target, const std::string& region, double alpha,
         double beta, double gamma, double delta) {
        Region r;
        if (region == "U" || region == "upper")
          r = Region::upper;
        else if (region == "L" || region == "lower")
          r = Region::lower;
        else
          throw std::invalid_argument("region must be 'U' or 'L'");
        const ExponentSummary s =
            theoretical_exponent(target_of(target), r, alpha, beta, gamma, delta);
        return py::make_tuple(s.s, s.rate, s.s_lower);
      },
      py::arg("target"), py::arg("region"), py::arg("alpha"), py::arg("beta"),
      py::arg("gamma"), py::arg("delta"),
      "(s, rate, s_lower) for a target and diagonal region");

  m.def("run_experiment", &run_experiment, py::arg("config"),
        "convergence and confidence-band studies to config.output_dir");
  m.def("run_diagnostics", &run_diagnostics, py::arg("config"),
        "concentration diagnostics to config.output_dir");

  m.def(
      "write_trajectory",
      [](const Trajectory& traj, const std::string& events,
         const std::string& snapshots) {
        write_event_log(events, traj);
        write_snapshot_file(snapshots, traj);
      },
      py::arg("trajectory"), py::arg("events"), py::arg("snapshots"));
  m.def(
      "read_trajectory",
      [](const std::string& events, const std::string& snapshots) {
        return read_trajectory(events, snapshots);
      },
      py::arg("events"), py::arg("snapshots"));
}
