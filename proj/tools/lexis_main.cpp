// Command-line front end: simulate | solve | estimate | select | diagnose |
// experiment. A run starts from the section5 preset and/or a JSON config
// file; explicit flags override both. Outputs are comma-separated tables
// under --out (column orders documented in README.md).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lexis/config.hpp"
#include "lexis/estimation.hpp"
#include "lexis/experiment.hpp"
#include "lexis/io.hpp"
#include "lexis/renewal.hpp"
#include "lexis/rng.hpp"
#include "lexis/simulate.hpp"

namespace {

using namespace lexis;

std::vector<double> lattice_times(const ExperimentConfig& cfg, double horizon) {
  std::vector<double> times;
  for (double s = 0.0; s < horizon + 1e-12; s += cfg.snapshot_lattice)
    times.push_back(std::min(s, horizon));
  for (const auto& [t, a] : cfg.density_points) times.push_back(t);
  for (const auto& [t, a] : cfg.death_points) times.push_back(t);
  times.push_back(horizon);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              times.end());
  return times;
}

const PopulationState& snapshot_at(const Trajectory& traj, double t) {
  for (const auto& s : traj.snapshots)
    if (std::abs(s.time - t) <= 1e-9) return s;
  throw std::runtime_error("stored trajectory has no snapshot at time " +
                           std::to_string(t));
}

BandwidthGrid grid_for(const ExperimentConfig& cfg, double scale_N) {
  if (cfg.grid_mode == "uniform") return uniform_grid(scale_N);
  return geometric_grid(scale_N, cfg.grid_points);
}

int cmd_simulate(const ExperimentConfig& cfg, long long n_override) {
  const Demography demo = build_model(cfg.model);
  const long long N = n_override > 0 ? n_override : cfg.ci_N;
  const std::vector<double> times = lattice_times(cfg, demo.domain.horizon_T);
  const PopulationState init =
      sample_initial(demo.initial, N, derive_stream(cfg.seed, 0));
  const Trajectory traj = simulate(init, demo.rates, demo.domain, times,
                                   derive_stream(cfg.seed, 1));
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  write_event_log(dir / "sim_events.csv", traj);
  write_snapshot_file(dir / "sim_snapshots.csv", traj);
  {
    std::ostringstream out;
    out << "time,mass\n";
    for (const auto& [t, mass] : population_size_path(traj))
      out << format_double(t) << ',' << format_double(mass) << '\n';
    write_text_file(dir / "sim_population_path.csv", out.str());
  }
  std::cout << "simulated N=" << N << ": " << traj.events.size() << " events, "
            << traj.deaths.size() << " deaths, final population "
            << traj.final_state.ages.size() << "\n"
            << "wrote " << (dir / "sim_events.csv").string() << ", "
            << (dir / "sim_snapshots.csv").string() << ", "
            << (dir / "sim_population_path.csv").string() << "\n";
  return 0;
}

int cmd_solve(const ExperimentConfig& cfg) {
  const Demography demo = build_model(cfg.model);
  const RenewalSolution sol =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);
  const double T = demo.domain.horizon_T;
  const double A = demo.domain.max_age;
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  {
    std::ostringstream out;
    out << "t,B\n";
    const auto& B = sol.B_values();
    for (std::size_t i = 0; i < B.size(); ++i)
      out << format_double(static_cast<double>(i) * sol.dt()) << ','
          << format_double(B[i]) << '\n';
    write_text_file(dir / "birth_curve.csv", out.str());
  }
  // Reporting lattices: time step 1.005, age steps 0.2002 for the density
  // and 1.0008 for the death rate, last age node clipped to max_age.
  std::vector<double> times;
  for (double t = 0.0; t < T + 1e-9; t += 1.005) times.push_back(t);
  auto age_lattice = [&](double step) {
    std::vector<double> ages;
    for (double a = 0.0; a < A - 1e-9; a += step) ages.push_back(a);
    ages.push_back(A);
    return ages;
  };
  {
    std::ostringstream out;
    out << "t,a,density\n";
    for (double t : times)
      for (double a : age_lattice(0.2002))
        out << format_double(t) << ',' << format_double(a) << ','
            << format_double(limit_density(sol, t, a)) << '\n';
    write_text_file(dir / "density_lattice.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "t,a,death_intensity,death_rate\n";
    for (double t : times)
      for (double a : age_lattice(1.0008))
        out << format_double(t) << ',' << format_double(a) << ','
            << format_double(limit_death_intensity(sol, t, a)) << ','
            << format_double(demo.rates.death(t, a)) << '\n';
    write_text_file(dir / "death_lattice.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "target,t,a,truth\n";
    for (const auto& [t, a] : cfg.density_points)
      out << "density," << format_double(t) << ',' << format_double(a) << ','
          << format_double(limit_density(sol, t, a)) << '\n';
    for (const auto& [t, a] : cfg.death_points) {
      out << "death_intensity," << format_double(t) << ',' << format_double(a)
          << ',' << format_double(limit_death_intensity(sol, t, a)) << '\n';
      out << "death_rate," << format_double(t) << ',' << format_double(a) << ','
          << format_double(demo.rates.death(t, a)) << '\n';
    }
    write_text_file(dir / "eval_points.csv", out.str());
  }
  std::cout << "solved at dt=" << cfg.dt << "; wrote birth_curve.csv, "
            << "density_lattice.csv, death_lattice.csv, eval_points.csv under "
            << dir.string() << "\n";
  return 0;
}

struct LoadedTrajectory {
  Trajectory traj;
  BandwidthGrid grid;
  BandwidthGrid2 grid2;
  GLConfig gl;
  Kernel1D kt, ka;
  SkewedProductKernel pk;
};

LoadedTrajectory load_for_estimation(const ExperimentConfig& cfg,
                                     const std::string& events,
                                     const std::string& snapshots) {
  LoadedTrajectory L{Trajectory{},
                     BandwidthGrid{},
                     BandwidthGrid2{},
                     GLConfig{},
                     kernel_by_name(cfg.kernel_time),
                     kernel_by_name(cfg.kernel_age),
                     SkewedProductKernel{}};
  L.traj = read_trajectory(events, snapshots);
  if (L.traj.scale_N < 2.0)
    throw std::runtime_error("stored trajectory has scale_N < 2");
  L.grid = grid_for(cfg, L.traj.scale_N);
  L.grid2 = BandwidthGrid2{L.grid, L.grid};
  L.gl.c_star = cfg.c_star;
  L.gl.varpi = cfg.varpi.front();
  L.gl.order_restrict_bivariate = cfg.order_restrict_bivariate;
  L.pk = SkewedProductKernel{L.kt, L.ka, true};
  return L;
}

int cmd_estimate(const ExperimentConfig& cfg, const std::string& events,
                 const std::string& snapshots) {
  const LoadedTrajectory L = load_for_estimation(cfg, events, snapshots);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  std::ostringstream out;
  out << "estimator,t,a,varpi,value,h1,h2\n";
  for (const auto& [t, a] : cfg.density_points) {
    const EstimateReport g =
        gl_select_density(snapshot_at(L.traj, t), L.grid, L.ka, L.gl, t, a);
    out << "g," << format_double(t) << ',' << format_double(a) << ",0,"
        << format_double(g.value) << ','
        << format_double(g.selected_bandwidths[0]) << ",0\n";
  }
  for (const auto& [t, a] : cfg.death_points) {
    const EstimateReport pi = gl_select_pi(L.traj.deaths, L.grid2, L.pk, L.gl,
                                           t, a, L.traj.scale_N);
    out << "pi," << format_double(t) << ',' << format_double(a) << ",0,"
        << format_double(pi.value) << ','
        << format_double(pi.selected_bandwidths[0]) << ','
        << format_double(pi.selected_bandwidths[1]) << '\n';
    const EstimateReport g =
        gl_select_density(snapshot_at(L.traj, t), L.grid, L.ka, L.gl, t, a);
    out << "g," << format_double(t) << ',' << format_double(a) << ",0,"
        << format_double(g.value) << ','
        << format_double(g.selected_bandwidths[0]) << ",0\n";
    for (double varpi : cfg.varpi)
      out << "mu," << format_double(t) << ',' << format_double(a) << ','
          << format_double(varpi) << ','
          << format_double(estimate_mu(g, pi, varpi)) << ','
          << format_double(pi.selected_bandwidths[0]) << ','
          << format_double(pi.selected_bandwidths[1]) << '\n';
  }
  write_text_file(dir / "estimates.csv", out.str());
  std::cout << "wrote " << (dir / "estimates.csv").string() << "\n";
  return 0;
}

int cmd_select(const ExperimentConfig& cfg, const std::string& events,
               const std::string& snapshots) {
  const LoadedTrajectory L = load_for_estimation(cfg, events, snapshots);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  {
    std::ostringstream out;
    out << "t,a,h,estimate,A,V,selected\n";
    auto dump = [&](double t, double a) {
      const EstimateReport g =
          gl_select_density(snapshot_at(L.traj, t), L.grid, L.ka, L.gl, t, a);
      for (std::size_t i = 0; i < g.rows.size(); ++i)
        out << format_double(t) << ',' << format_double(a) << ','
            << format_double(g.rows[i].h[0]) << ','
            << format_double(g.rows[i].estimate) << ','
            << format_double(g.rows[i].A) << ',' << format_double(g.rows[i].V)
            << ',' << (i == g.selected_index ? 1 : 0) << '\n';
    };
    for (const auto& [t, a] : cfg.density_points) dump(t, a);
    for (const auto& [t, a] : cfg.death_points) dump(t, a);
    write_text_file(dir / "gl_density.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "t,a,h1,h2,estimate,A,V,selected\n";
    for (const auto& [t, a] : cfg.death_points) {
      const EstimateReport pi = gl_select_pi(L.traj.deaths, L.grid2, L.pk, L.gl,
                                             t, a, L.traj.scale_N);
      for (std::size_t i = 0; i < pi.rows.size(); ++i)
        out << format_double(t) << ',' << format_double(a) << ','
            << format_double(pi.rows[i].h[0]) << ','
            << format_double(pi.rows[i].h[1]) << ','
            << format_double(pi.rows[i].estimate) << ','
            << format_double(pi.rows[i].A) << ',' << format_double(pi.rows[i].V)
            << ',' << (i == pi.selected_index ? 1 : 0) << '\n';
    }
    write_text_file(dir / "gl_pi.csv", out.str());
  }
  std::cout << "wrote " << (dir / "gl_density.csv").string() << " and "
            << (dir / "gl_pi.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "age-structured birth-death simulation and nonparametric rate "
      "estimation"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* opt_config =
      app.add_option("--config", config_path, "JSON config file")
          ->check(CLI::ExistingFile);
  auto* opt_preset =
      app.add_option("--preset", preset, "named preset (section5)");
  auto* opt_seed = app.add_option("--seed", seed, "root seed");
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  auto* opt_threads =
      app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* sub_simulate =
      app.add_subcommand("simulate", "one trajectory to files");
  long long sim_n = 0;
  sub_simulate->add_option("--n", sim_n, "population size (default: the config's ci_N)")
      ->check(CLI::PositiveNumber);
  auto* sub_solve = app.add_subcommand("solve", "limit tables from the solver");
  auto* sub_estimate = app.add_subcommand(
      "estimate", "adaptive estimates at the configured points from stored files");
  auto* sub_select = app.add_subcommand(
      "select", "bandwidth-selection tables from stored files");
  std::string events_path, snapshots_path;
  for (auto* sub : {sub_estimate, sub_select}) {
    sub->add_option("--events", events_path, "event-log file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--snapshots", snapshots_path, "snapshot file")
        ->required()
        ->check(CLI::ExistingFile);
  }
  auto* sub_diagnose =
      app.add_subcommand("diagnose", "concentration tails and discrepancies");
  auto* sub_experiment =
      app.add_subcommand("experiment", "convergence and confidence-band studies");
  for (auto* sub : {sub_simulate, sub_solve, sub_estimate, sub_select,
                    sub_diagnose, sub_experiment})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (opt_config->count() == 0 && opt_preset->count() == 0) {
    std::cerr << "error: provide --preset section5 and/or --config PATH\n"
              << app.help();
    return 2;
  }

  try {
    lexis::ExperimentConfig cfg;
    if (opt_preset->count() > 0) {
      if (preset != "section5")
        throw std::invalid_argument("unknown preset: " + preset);
      cfg = lexis::section5_preset();
    }
    if (opt_config->count() > 0) cfg = lexis::load_config(config_path, cfg);
    if (opt_seed->count() > 0) cfg.seed = seed;
    if (opt_out->count() > 0) cfg.output_dir = out_dir;
    if (opt_threads->count() > 0) cfg.threads = threads;
    lexis::validate_config(cfg);

    if (sub_simulate->parsed()) return cmd_simulate(cfg, sim_n);
    if (sub_solve->parsed()) return cmd_solve(cfg);
    if (sub_estimate->parsed())
      return cmd_estimate(cfg, events_path, snapshots_path);
    if (sub_select->parsed()) return cmd_select(cfg, events_path, snapshots_path);
    if (sub_diagnose->parsed()) {
      lexis::run_diagnostics(cfg);
      std::cout << "wrote diagnostics under " << cfg.output_dir << "\n";
      return 0;
    }
    if (sub_experiment->parsed()) {
      lexis::run_experiment(cfg);
      std::cout << "wrote experiment outputs under " << cfg.output_dir << "\n";
      return 0;
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
