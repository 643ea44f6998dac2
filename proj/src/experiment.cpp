#include "lexis/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lexis/io.hpp"
#include "lexis/rng.hpp"
#include "lexis/simulate.hpp"

namespace lexis {

namespace {

// Work queue over `count` units. Unit results must go into preallocated
// slots so that the outcome does not depend on scheduling; reductions happen
// after the join, in index order.
void parallel_units(std::size_t count, int threads,
                    const std::function<void(std::size_t)>& work) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  const int n = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Study indices for seed-stream derivation: each study owns a root stream,
// each replication unit a substream of it.
constexpr std::uint64_t kConvergenceStream = 1;
constexpr std::uint64_t kCiStream = 2;
constexpr std::uint64_t kConcentrationStream = 3;

const PopulationState& snapshot_at_time(const Trajectory& traj, double t) {
  for (const auto& s : traj.snapshots)
    if (std::abs(s.time - t) <= 1e-9) return s;
  throw std::runtime_error("no snapshot recorded at time " + std::to_string(t));
}

std::vector<double> sorted_unique_times(
    const std::vector<std::pair<double, double>>& pts_a,
    const std::vector<std::pair<double, double>>& pts_b) {
  std::vector<double> times;
  for (const auto& p : pts_a) times.push_back(p.first);
  for (const auto& p : pts_b) times.push_back(p.first);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

BandwidthGrid make_grid(const ExperimentConfig& cfg, double scale_N) {
  if (cfg.grid_mode == "uniform") return uniform_grid(scale_N);
  return geometric_grid(scale_N, cfg.grid_points);
}

// Estimate at the error-minimizing grid row (the infeasible benchmark).
struct OracleValue {
  double value = 0.0;
  double error = 0.0;
};

OracleValue oracle_from_rows(const std::vector<GLTableRow>& rows, double truth) {
  OracleValue best;
  bool first = true;
  for (const auto& row : rows) {
    const double err = std::abs(row.estimate - truth);
    // <= so that later rows (larger bandwidths) win ties, matching the
    // selection rule's tie policy.
    if (first || err <= best.error) {
      best.value = row.estimate;
      best.error = err;
      first = false;
    }
  }
  return best;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << "0x" << std::hex << v;
  return out.str();
}

}  // namespace

std::string target_name(Target target) {
  switch (target) {
    case Target::density: return "density";
    case Target::death_intensity: return "death_intensity";
    case Target::death_rate: return "death_rate";
  }
  throw std::logic_error("target_name: unknown target");
}

Region region_of(double t, double a) {
  return a > t ? Region::upper : Region::lower;
}

ExponentSummary theoretical_exponent(Target target, Region region, double alpha,
                                     double beta, double gamma, double delta) {
  for (double s : {alpha, beta, gamma, delta})
    if (!(s > 0.0))
      throw std::invalid_argument("theoretical_exponent: parameters must be positive");
  const double below =
      std::min(std::min(alpha, beta), std::min(gamma + 1.0, delta));
  ExponentSummary out;
  if (target == Target::density) {
    out.s = (region == Region::upper)
                ? std::max(std::min(gamma, delta + 1.0), delta)
                : below;
    out.s_lower = std::max(gamma, delta);
  } else {
    const double s_age = (region == Region::upper) ? delta : below;
    out.s = 1.0 / (1.0 / std::min(gamma, delta) + 1.0 / s_age);
    out.s_lower = 1.0 / (1.0 / gamma + 1.0 / delta);
  }
  out.rate = out.s / (2.0 * out.s + 1.0);
  return out;
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty())
    throw std::invalid_argument("empirical_quantile: no samples");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("empirical_quantile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[hi] * w;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need two or more paired points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("least_squares: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

// --- Convergence study -------------------------------------------------------

namespace {

// Per-replication errors for one tracked row (target at a point).
struct TrackedRow {
  Target target = Target::density;
  double t = 0.0, a = 0.0;
  double truth = 0.0;
};

}  // namespace

std::vector<RateRegressionResult> run_convergence_study(const ExperimentConfig& cfg) {
  if (cfg.N_list.size() < 3)
    throw std::invalid_argument(
        "convergence study: need at least three population scales");
  validate_config(cfg);
  const Demography demo = build_model(cfg.model);
  const Kernel1D kt = kernel_by_name(cfg.kernel_time);
  const Kernel1D ka = kernel_by_name(cfg.kernel_age);
  const SkewedProductKernel pk{kt, ka, true};
  const RenewalSolution sol =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);

  // Tracked rows: density at its points, then the death numerator and the
  // death rate at the death points.
  std::vector<TrackedRow> rows;
  for (const auto& [t, a] : cfg.density_points)
    rows.push_back({Target::density, t, a, limit_density(sol, t, a)});
  for (const auto& [t, a] : cfg.death_points)
    rows.push_back({Target::death_intensity, t, a, limit_death_intensity(sol, t, a)});
  for (const auto& [t, a] : cfg.death_points)
    rows.push_back({Target::death_rate, t, a, demo.rates.death(t, a)});
  const std::size_t n_rows = rows.size();
  const std::size_t nd = cfg.density_points.size();
  const std::size_t np = cfg.death_points.size();

  const std::vector<double> snapshot_times =
      sorted_unique_times(cfg.density_points, cfg.death_points);

  const auto M = static_cast<std::size_t>(cfg.replications);
  const std::size_t n_scales = cfg.N_list.size();
  const std::size_t units = n_scales * M;
  const std::uint64_t root = derive_stream(cfg.seed, kConvergenceStream);
  const double varpi0 = cfg.varpi.front();

  // errors[(scale, rep)][row] for adaptive and oracle.
  std::vector<std::vector<double>> adaptive(units), oracle(units);

  GLConfig gl;
  gl.c_star = cfg.c_star;
  gl.varpi = varpi0;
  gl.order_restrict_bivariate = cfg.order_restrict_bivariate;

  auto unit_work = [&](std::size_t unit) {
    const std::size_t scale_idx = unit / M;
    const std::size_t rep = unit % M;
    const long long N = cfg.N_list[scale_idx];
    try {
      const std::uint64_t unit_seed = derive_stream(root, unit);
      const PopulationState init =
          sample_initial(demo.initial, N, derive_stream(unit_seed, 0));
      const Trajectory traj = simulate(init, demo.rates, demo.domain,
                                       snapshot_times, derive_stream(unit_seed, 1));
      const BandwidthGrid grid = make_grid(cfg, static_cast<double>(N));
      const BandwidthGrid2 grid2{grid, grid};

      std::vector<double> ad(n_rows, 0.0), orc(n_rows, 0.0);
      // Density rows.
      for (std::size_t i = 0; i < nd; ++i) {
        const auto& [t, a] = cfg.density_points[i];
        const auto& snap = snapshot_at_time(traj, t);
        const EstimateReport rep_g = gl_select_density(snap, grid, ka, gl, t, a);
        const OracleValue ov = oracle_from_rows(rep_g.rows, rows[i].truth);
        ad[i] = std::abs(rep_g.value - rows[i].truth);
        orc[i] = ov.error;
        if (orc[i] > ad[i])
          throw std::logic_error("oracle dominance violated for the density");
      }
      // Death rows: numerator, then the quotient.
      for (std::size_t i = 0; i < np; ++i) {
        const auto& [t, a] = cfg.death_points[i];
        const EstimateReport rep_pi =
            gl_select_pi(traj.deaths, grid2, pk, gl, t, a, static_cast<double>(N));
        const std::size_t pi_row = nd + i;
        const OracleValue ov_pi = oracle_from_rows(rep_pi.rows, rows[pi_row].truth);
        ad[pi_row] = std::abs(rep_pi.value - rows[pi_row].truth);
        orc[pi_row] = ov_pi.error;
        if (orc[pi_row] > ad[pi_row])
          throw std::logic_error("oracle dominance violated for the numerator");

        const auto& snap = snapshot_at_time(traj, t);
        const EstimateReport rep_g = gl_select_density(snap, grid, ka, gl, t, a);
        const double truth_g = limit_density(sol, t, a);
        const OracleValue ov_g = oracle_from_rows(rep_g.rows, truth_g);
        const std::size_t mu_row = nd + np + i;
        const double mu_ad = rep_pi.value / std::max(rep_g.value, varpi0);
        const double mu_or = ov_pi.value / std::max(ov_g.value, varpi0);
        ad[mu_row] = std::abs(mu_ad - rows[mu_row].truth);
        orc[mu_row] = std::abs(mu_or - rows[mu_row].truth);
      }
      adaptive[unit] = std::move(ad);
      oracle[unit] = std::move(orc);
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(rep) + " at N=" +
                               std::to_string(N) + ": " + e.what());
    }
  };
  parallel_units(units, cfg.threads, unit_work);

  // Fixed-order reduction.
  std::vector<RateRegressionResult> results(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    RateRegressionResult& res = results[r];
    res.target = rows[r].target;
    res.t = rows[r].t;
    res.a = rows[r].a;
    res.theory = theoretical_exponent(res.target, region_of(res.t, res.a),
                                      cfg.alpha, cfg.beta, cfg.gamma, cfg.delta);
    std::vector<double> lnN, ln_ad, ln_or;
    for (std::size_t s = 0; s < n_scales; ++s) {
      double sq_ad = 0.0, sq_or = 0.0;
      for (std::size_t rep = 0; rep < M; ++rep) {
        const std::size_t unit = s * M + rep;
        sq_ad += adaptive[unit][r] * adaptive[unit][r];
        sq_or += oracle[unit][r] * oracle[unit][r];
      }
      RatePointRow row;
      row.N = cfg.N_list[s];
      row.rmse_adaptive = std::sqrt(sq_ad / static_cast<double>(M));
      row.rmse_oracle = std::sqrt(sq_or / static_cast<double>(M));
      res.per_N.push_back(row);
      lnN.push_back(std::log(static_cast<double>(row.N)));
      // Exact zeros only occur in degenerate models; floor them so the
      // regression stays defined (constant tables then give slope zero).
      ln_ad.push_back(std::log(std::max(row.rmse_adaptive, 1e-300)));
      ln_or.push_back(std::log(std::max(row.rmse_oracle, 1e-300)));
    }
    const LineFit fa = least_squares(lnN, ln_ad);
    const LineFit fo = least_squares(lnN, ln_or);
    res.slope = fa.slope;
    res.intercept = fa.intercept;
    res.oracle_slope = fo.slope;
    res.oracle_intercept = fo.intercept;
  }
  return results;
}

// --- Pointwise confidence bands ----------------------------------------------

CIStudy run_pointwise_ci(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Demography demo = build_model(cfg.model);
  const Kernel1D kt = kernel_by_name(cfg.kernel_time);
  const Kernel1D ka = kernel_by_name(cfg.kernel_age);
  const SkewedProductKernel pk{kt, ka, true};
  const RenewalSolution sol =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);

  const long long N = cfg.ci_N;
  const auto M = static_cast<std::size_t>(cfg.replications);
  const std::vector<double> snapshot_times =
      sorted_unique_times(cfg.density_points, cfg.death_points);
  const std::uint64_t root = derive_stream(cfg.seed, kCiStream);

  const std::size_t nd = cfg.density_points.size();
  const std::size_t np = cfg.death_points.size();
  const std::size_t nv = cfg.varpi.size();
  // Per replication: g_ad, g_or at density points; pi_ad, pi_or and the
  // g values at death points feeding mu per varpi.
  struct UnitValues {
    std::vector<double> g_ad, g_or;          // nd
    std::vector<double> pi_ad, pi_or;        // np
    std::vector<double> mu_ad, mu_or;        // np * nv, varpi-major by point
  };
  std::vector<UnitValues> slots(M);

  GLConfig gl;
  gl.c_star = cfg.c_star;
  gl.varpi = cfg.varpi.front();
  gl.order_restrict_bivariate = cfg.order_restrict_bivariate;

  const BandwidthGrid grid = make_grid(cfg, static_cast<double>(N));
  const BandwidthGrid2 grid2{grid, grid};

  auto unit_work = [&](std::size_t rep) {
    try {
      const std::uint64_t unit_seed = derive_stream(root, rep);
      const PopulationState init =
          sample_initial(demo.initial, N, derive_stream(unit_seed, 0));
      const Trajectory traj = simulate(init, demo.rates, demo.domain,
                                       snapshot_times, derive_stream(unit_seed, 1));
      UnitValues vals;
      vals.g_ad.resize(nd);
      vals.g_or.resize(nd);
      vals.pi_ad.resize(np);
      vals.pi_or.resize(np);
      vals.mu_ad.resize(np * nv);
      vals.mu_or.resize(np * nv);
      for (std::size_t i = 0; i < nd; ++i) {
        const auto& [t, a] = cfg.density_points[i];
        const auto& snap = snapshot_at_time(traj, t);
        const EstimateReport rep_g = gl_select_density(snap, grid, ka, gl, t, a);
        vals.g_ad[i] = rep_g.value;
        vals.g_or[i] =
            oracle_from_rows(rep_g.rows, limit_density(sol, t, a)).value;
      }
      for (std::size_t i = 0; i < np; ++i) {
        const auto& [t, a] = cfg.death_points[i];
        const EstimateReport rep_pi =
            gl_select_pi(traj.deaths, grid2, pk, gl, t, a, static_cast<double>(N));
        vals.pi_ad[i] = rep_pi.value;
        vals.pi_or[i] =
            oracle_from_rows(rep_pi.rows, limit_death_intensity(sol, t, a)).value;
        const auto& snap = snapshot_at_time(traj, t);
        const EstimateReport rep_g = gl_select_density(snap, grid, ka, gl, t, a);
        const double g_or =
            oracle_from_rows(rep_g.rows, limit_density(sol, t, a)).value;
        for (std::size_t v = 0; v < nv; ++v) {
          vals.mu_ad[i * nv + v] =
              rep_pi.value / std::max(rep_g.value, cfg.varpi[v]);
          vals.mu_or[i * nv + v] = vals.pi_or[i] / std::max(g_or, cfg.varpi[v]);
        }
      }
      slots[rep] = std::move(vals);
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(rep) + " at N=" +
                               std::to_string(N) + ": " + e.what());
    }
  };
  parallel_units(M, cfg.threads, unit_work);

  CIStudy study;
  auto summarize = [&](const std::string& name, double t, double a, double varpi,
                       double truth, const std::function<double(std::size_t)>& pick) {
    std::vector<double> v(M);
    for (std::size_t rep = 0; rep < M; ++rep) v[rep] = pick(rep);
    CIRow row;
    row.estimator = name;
    row.t = t;
    row.a = a;
    row.varpi = varpi;
    row.truth = truth;
    double sum = 0.0;
    for (double x : v) sum += x;
    row.mean = sum / static_cast<double>(M);
    row.q025 = empirical_quantile(v, 0.025);
    row.q975 = empirical_quantile(v, 0.975);
    study.rows.push_back(row);
  };

  for (std::size_t i = 0; i < nd; ++i) {
    const auto& [t, a] = cfg.density_points[i];
    const double truth = limit_density(sol, t, a);
    summarize("g_adaptive", t, a, 0.0, truth,
              [&, i](std::size_t r) { return slots[r].g_ad[i]; });
    summarize("g_oracle", t, a, 0.0, truth,
              [&, i](std::size_t r) { return slots[r].g_or[i]; });
  }
  for (std::size_t i = 0; i < np; ++i) {
    const auto& [t, a] = cfg.death_points[i];
    const double truth_pi = limit_death_intensity(sol, t, a);
    summarize("pi_adaptive", t, a, 0.0, truth_pi,
              [&, i](std::size_t r) { return slots[r].pi_ad[i]; });
    summarize("pi_oracle", t, a, 0.0, truth_pi,
              [&, i](std::size_t r) { return slots[r].pi_or[i]; });
    const double truth_mu = demo.rates.death(t, a);
    for (std::size_t v = 0; v < nv; ++v) {
      summarize("mu_adaptive", t, a, cfg.varpi[v], truth_mu,
                [&, i, v](std::size_t r) { return slots[r].mu_ad[i * nv + v]; });
      summarize("mu_oracle", t, a, cfg.varpi[v], truth_mu,
                [&, i, v](std::size_t r) { return slots[r].mu_or[i * nv + v]; });
    }
  }
  return study;
}

// --- Concentration-tail study --------------------------------------------------

ConcentrationStudy run_concentration_study(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Demography demo = build_model(cfg.model);
  const double T = demo.domain.horizon_T;
  const RenewalSolution sol =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);
  const TestFunctionFamily family = default_family(demo.rates, demo.domain);
  // Fixed parabolic weight: mass around the configured age at the final time.
  const Weight w2 = weight_from_kernel(epanechnikov_kernel(), cfg.conc_h,
                                       T - cfg.conc_center_age, true);
  const DiscrepancyBaseline baseline = discrepancy_baseline(sol, w2, family, T);
  const double scale = weight_interp_norm(w2);

  std::vector<double> u_grid;
  for (std::size_t i = 0; i <= cfg.u_points; ++i)
    u_grid.push_back(cfg.u_max * static_cast<double>(i) /
                     static_cast<double>(cfg.u_points));

  const auto M = static_cast<std::size_t>(cfg.conc_replications);
  const std::uint64_t root = derive_stream(cfg.seed, kConcentrationStream);
  const std::size_t n_scales = cfg.conc_N.size();
  const std::size_t units = n_scales * M;
  std::vector<double> sample_slots(units, 0.0);

  auto unit_work = [&](std::size_t unit) {
    const std::size_t scale_idx = unit / M;
    const std::size_t rep = unit % M;
    const long long N = cfg.conc_N[scale_idx];
    try {
      const std::uint64_t unit_seed = derive_stream(root, unit);
      const PopulationState init =
          sample_initial(demo.initial, N, derive_stream(unit_seed, 0));
      const Trajectory traj = simulate(init, demo.rates, demo.domain, {},
                                       derive_stream(unit_seed, 1));
      sample_slots[unit] =
          weighted_discrepancy_at(traj.final_state, baseline, w2, family) / scale;
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(rep) + " at N=" +
                               std::to_string(N) + ": " + e.what());
    }
  };
  parallel_units(units, cfg.threads, unit_work);

  ConcentrationStudy study;
  for (std::size_t s = 0; s < n_scales; ++s) {
    std::vector<double> samples(sample_slots.begin() +
                                    static_cast<std::ptrdiff_t>(s * M),
                                sample_slots.begin() +
                                    static_cast<std::ptrdiff_t>((s + 1) * M));
    ConcentrationRow row;
    row.N = cfg.conc_N[s];
    row.median = empirical_quantile(samples, 0.5);
    row.fitted_rate = fitted_rate(samples, u_grid);
    std::vector<TailRow> tail;
    if (row.fitted_rate > 0.0) {
      std::vector<double> normalized = samples;
      for (double& x : normalized) x /= row.fitted_rate;
      tail = concentration_tail(normalized, u_grid);
      row.decay_rate = tail_decay_rate(tail);
    } else {
      // All-zero samples: the tail is identically zero.
      tail = concentration_tail(samples, u_grid);
      row.decay_rate = tail_decay_rate(tail);
    }
    study.rows.push_back(row);
    study.tails.push_back(std::move(tail));
    study.samples.push_back(std::move(samples));
  }
  return study;
}

// --- Persistence ---------------------------------------------------------------

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "lexis run manifest\n";
  out << "version " << LEXIS_VERSION << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "config_hash " << hex64(config_hash(cfg)) << "\n";
  out << "config\n" << config_to_json(cfg) << "\n";
  write_text_file(dir / "manifest.txt", out.str());
}

namespace {

void write_truth_check(const std::filesystem::path& dir,
                       const ExperimentConfig& cfg, const Demography& demo) {
  const RenewalSolution coarse =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);
  const RenewalSolution fine =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt / 2.0);
  std::ostringstream out;
  out << "target,t,a,value_dt,value_half_dt\n";
  for (const auto& [t, a] : cfg.density_points)
    out << "density," << format_double(t) << ',' << format_double(a) << ','
        << format_double(limit_density(coarse, t, a)) << ','
        << format_double(limit_density(fine, t, a)) << '\n';
  for (const auto& [t, a] : cfg.death_points)
    out << "death_intensity," << format_double(t) << ',' << format_double(a)
        << ',' << format_double(limit_death_intensity(coarse, t, a)) << ','
        << format_double(limit_death_intensity(fine, t, a)) << '\n';
  write_text_file(dir / "truth_check.csv", out.str());
}

void write_convergence_outputs(const std::filesystem::path& dir,
                               const std::vector<RateRegressionResult>& results) {
  {
    std::ostringstream out;
    out << "target,t,a,N,rmse_adaptive,rmse_oracle\n";
    for (const auto& res : results)
      for (const auto& row : res.per_N)
        out << target_name(res.target) << ',' << format_double(res.t) << ','
            << format_double(res.a) << ',' << row.N << ','
            << format_double(row.rmse_adaptive) << ','
            << format_double(row.rmse_oracle) << '\n';
    write_text_file(dir / "convergence_rmse.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "target,t,a,slope,intercept,oracle_slope,oracle_intercept,"
           "theory_s,theory_rate,theory_s_lower\n";
    for (const auto& res : results)
      out << target_name(res.target) << ',' << format_double(res.t) << ','
          << format_double(res.a) << ',' << format_double(res.slope) << ','
          << format_double(res.intercept) << ','
          << format_double(res.oracle_slope) << ','
          << format_double(res.oracle_intercept) << ','
          << format_double(res.theory.s) << ',' << format_double(res.theory.rate)
          << ',' << format_double(res.theory.s_lower) << '\n';
    write_text_file(dir / "convergence_regression.csv", out.str());
  }
  {
    std::vector<Series> series;
    for (const auto& res : results) {
      Series s;
      s.label = target_name(res.target) + " (" + format_double(res.t) + "," +
                format_double(res.a) + ")";
      for (const auto& row : res.per_N) {
        s.x.push_back(std::log10(static_cast<double>(row.N)));
        s.y.push_back(std::log10(std::max(row.rmse_adaptive, 1e-300)));
      }
      series.push_back(std::move(s));
    }
    write_svg_chart(dir / "quicklook_convergence.svg",
                    "adaptive RMSE against population scale", "log10 N",
                    "log10 RMSE", series);
  }
}

void write_ci_outputs(const std::filesystem::path& dir, const CIStudy& study) {
  std::ostringstream out;
  out << "estimator,t,a,varpi,truth,mean,q025,q975\n";
  for (const auto& r : study.rows)
    out << r.estimator << ',' << format_double(r.t) << ',' << format_double(r.a)
        << ',' << format_double(r.varpi) << ',' << format_double(r.truth) << ','
        << format_double(r.mean) << ',' << format_double(r.q025) << ','
        << format_double(r.q975) << '\n';
  write_text_file(dir / "ci_bands.csv", out.str());
}

void write_concentration_outputs(const std::filesystem::path& dir,
                                 const ExperimentConfig& cfg,
                                 const ConcentrationStudy& study) {
  {
    std::ostringstream out;
    out << "N,median_normalized,fitted_rate,decay_rate\n";
    for (const auto& r : study.rows)
      out << r.N << ',' << format_double(r.median) << ','
          << format_double(r.fitted_rate) << ',' << format_double(r.decay_rate)
          << '\n';
    write_text_file(dir / "concentration_medians.csv", out.str());
  }
  for (std::size_t s = 0; s < study.rows.size(); ++s)
    write_tail_table(dir / ("concentration_tail_N" +
                            std::to_string(study.rows[s].N) + ".csv"),
                     study.tails[s]);
  {
    std::vector<Series> series;
    for (std::size_t s = 0; s < study.rows.size(); ++s) {
      Series line;
      line.label = "N=" + std::to_string(study.rows[s].N);
      for (const auto& row : study.tails[s])
        if (row.u > 0.0) {
          line.x.push_back(row.u);
          line.y.push_back(row.empirical);
        }
      series.push_back(std::move(line));
    }
    if (!study.tails.empty()) {
      Series env;
      env.label = "envelope";
      for (const auto& row : study.tails.front())
        if (row.u > 0.0) {
          env.x.push_back(row.u);
          env.y.push_back(std::min(row.envelope, 1.0));
        }
      series.push_back(std::move(env));
    }
    write_svg_chart(dir / "quicklook_tail.svg",
                    "empirical concentration tails", "u", "tail frequency",
                    series);
  }
  (void)cfg;
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  const Demography demo = build_model(cfg.model);
  write_manifest(dir, cfg);
  write_truth_check(dir, cfg, demo);
  const auto convergence = run_convergence_study(cfg);
  write_convergence_outputs(dir, convergence);
  const auto ci = run_pointwise_ci(cfg);
  write_ci_outputs(dir, ci);
}

void run_diagnostics(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  write_manifest(dir, cfg);
  const auto study = run_concentration_study(cfg);
  write_concentration_outputs(dir, cfg, study);

  // One integrated-discrepancy reading on a lattice trajectory, as a
  // spacing-aware example of the time-integrated quantity.
  const Demography demo = build_model(cfg.model);
  const RenewalSolution sol =
      solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);
  const TestFunctionFamily family = default_family(demo.rates, demo.domain);
  const double T = demo.domain.horizon_T;
  const Weight w1 = constant_weight(1.0, 0.0, T);
  const Weight w2 = weight_from_kernel(epanechnikov_kernel(), cfg.conc_h,
                                       T - cfg.conc_center_age, true);
  std::vector<double> lattice;
  for (double s = 0.0; s <= T + 1e-12; s += cfg.snapshot_lattice)
    lattice.push_back(std::min(s, T));
  const long long N = cfg.conc_N.back();
  const std::uint64_t root = derive_stream(cfg.seed, kConcentrationStream + 1);
  const PopulationState init =
      sample_initial(demo.initial, N, derive_stream(root, 0));
  const Trajectory traj =
      simulate(init, demo.rates, demo.domain, lattice, derive_stream(root, 1));
  bool warn = false;
  const double integrated =
      integrated_discrepancy(traj, sol, w1, w2, family, 2048, &warn);
  std::ostringstream out;
  out << "quantity,value\n";
  out << "integrated_discrepancy," << format_double(integrated) << "\n";
  out << "snapshot_spacing," << format_double(cfg.snapshot_lattice) << "\n";
  out << "spacing_warning," << (warn ? 1 : 0) << "\n";
  write_text_file(dir / "diagnostics.csv", out.str());
}

}  // namespace lexis
