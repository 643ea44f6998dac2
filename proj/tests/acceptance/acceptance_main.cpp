// Acceptance gate: ten end-to-end criteria, each printed as one
// [PASS]/[FAIL] line with the measured quantities and wall time.
// The process exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexis/config.hpp"
#include "lexis/estimation.hpp"
#include "lexis/experiment.hpp"
#include "lexis/model.hpp"
#include "lexis/renewal.hpp"
#include "lexis/rng.hpp"
#include "lexis/simulate.hpp"

using namespace lexis;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, double time_limit_s,
                   const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0.0 && secs > time_limit_s) {
    out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ");
    std::ostringstream t;
    t << "time limit " << time_limit_s << " s exceeded";
    out.detail += t.str();
  }
  if (!out.pass) ++g_failures;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (out.pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": "
       << out.detail << " (" << secs << " s)";
  std::cout << line.str() << std::endl;
}

std::string fmt(double x, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double zero_rate(double, double) { return 0.0; }

InitialDensity uniform_profile(double lo, double hi) {
  const double height = 1.0 / (hi - lo);
  return InitialDensity([height](double) { return height; }, 1.0, height, lo, hi);
}

// ---------------------------------------------------------------------------
// 1. Pure transport: no events, ages advance by exactly the horizon.
Outcome criterion_pure_transport() {
  RateField rates(zero_rate, 0.0, zero_rate, 0.0, 200.0);
  Domain dom{20.0, 200.0};
  PopulationState init = sample_initial(uniform_profile(0.0, 50.0), 1000, 9001);
  Trajectory traj = simulate(init, rates, dom, {}, 9002);

  bool exact = traj.final_state.ages.size() == init.ages.size();
  if (exact)
    for (std::size_t i = 0; i < init.ages.size(); ++i)
      if (traj.final_state.ages[i] != init.ages[i] + 20.0) {
        exact = false;
        break;
      }
  Outcome out;
  out.pass = traj.events.empty() && traj.deaths.empty() && exact;
  out.detail = "events=" + std::to_string(traj.events.size()) +
               ", additive age shift exact=" + (exact ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Pure death at constant rate: mean survival matches the exponential law.
Outcome criterion_pure_death() {
  const long long N = 10000;
  const int M = 100;
  const double T = 5.0, m = 0.1;
  RateField rates(zero_rate, 0.0, [m](double, double) { return m; }, m, 200.0);
  Domain dom{T, 200.0};
  InitialDensity profile = uniform_profile(0.0, 50.0);

  double sum = 0.0;
  for (int rep = 0; rep < M; ++rep) {
    PopulationState init = sample_initial(profile, N, derive_stream(11, rep));
    Trajectory traj = simulate(init, rates, dom, {}, derive_stream(12, rep));
    sum += static_cast<double>(traj.final_state.ages.size()) /
           static_cast<double>(N);
  }
  const double mean = sum / M;
  const double p = std::exp(-m * T);
  const double tol = 3.0 * std::sqrt(p * (1.0 - p) / (static_cast<double>(N) * M));
  Outcome out;
  out.pass = std::abs(mean - p) <= tol;
  out.detail = "mean survival " + fmt(mean) + " vs " + fmt(p) + ", tol " + fmt(tol);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Constant-rate pure birth: mean growth factor matches the exponential law.
Outcome criterion_yule_mean() {
  const long long N = 1000;
  const int M = 200;
  const double T = 5.0, b = 0.1;
  RateField rates([b](double, double) { return b; }, b, zero_rate, 0.0, 300.0);
  Domain dom{T, 300.0};
  InitialDensity profile = uniform_profile(0.0, 50.0);

  double sum = 0.0;
  for (int rep = 0; rep < M; ++rep) {
    PopulationState init = sample_initial(profile, N, derive_stream(21, rep));
    Trajectory traj = simulate(init, rates, dom, {}, derive_stream(22, rep));
    sum += static_cast<double>(traj.final_state.ages.size()) /
           static_cast<double>(N);
  }
  const double mean = sum / M;
  const double target = std::exp(b * T);
  // Per-ancestor variance of the pure-birth line count is m(m-1).
  const double tol =
      3.0 * std::sqrt(target * (target - 1.0) / (static_cast<double>(N) * M));
  Outcome out;
  out.pass = std::abs(mean - target) <= tol;
  out.detail =
      "mean growth " + fmt(mean) + " vs " + fmt(target) + ", tol " + fmt(tol);
  return out;
}

// ---------------------------------------------------------------------------
// 4. Renewal closed form B(t) = 0.5 e^{0.5 t} and second-order convergence.
Outcome criterion_renewal_closed_form() {
  const double b = 0.5, T = 5.0;
  RateField rates([b](double, double) { return b; }, b, zero_rate, 0.0, 10.0);
  Domain dom{T, 10.0};
  InitialDensity g0 = uniform_profile(0.0, 1.0);

  auto max_err = [&](double dt) {
    RenewalSolution sol = solve_renewal(rates, g0, dom, dt);
    const auto& B = sol.B_values();
    double worst = 0.0;
    for (std::size_t k = 0; k < B.size(); ++k) {
      const double t = static_cast<double>(k) * sol.dt();
      worst = std::max(worst, std::abs(B[k] - 0.5 * std::exp(0.5 * t)));
    }
    return worst;
  };
  const double err = max_err(T / 2000.0);
  const double err_half = max_err(T / 4000.0);
  const double ratio = err / err_half;
  Outcome out;
  out.pass = err <= 1e-4 && ratio >= 3.5 && ratio <= 4.5;
  out.detail = "max error " + fmt(err, 3) + " (<=1e-4), halving ratio " +
               fmt(ratio, 4) + " in [3.5,4.5]";
  return out;
}

// ---------------------------------------------------------------------------
// 5. One particle trajectory against the solver: Kolmogorov distance of the
//    age distribution at the horizon.
Outcome criterion_particle_vs_limit() {
  ExperimentConfig cfg = section5_preset();
  Demography demo = build_model(cfg.model);
  PopulationState init = sample_initial(demo.initial, 4000, derive_stream(42, 900));
  Trajectory traj = simulate(init, demo.rates, demo.domain, {}, derive_stream(42, 901));
  RenewalSolution sol = solve_renewal(demo.rates, demo.initial, demo.domain, cfg.dt);

  const double T = demo.domain.horizon_T;
  const int J = 12000;
  const double da = demo.domain.max_age / J;
  std::vector<double> cum(J + 1, 0.0);
  double prev = limit_density(sol, T, 0.0);
  for (int j = 1; j <= J; ++j) {
    const double cur = limit_density(sol, T, j * da);
    cum[j] = cum[j - 1] + 0.5 * (prev + cur) * da;
    prev = cur;
  }
  const double total = cum[J];
  if (!(total > 0.0)) return {false, "limit age distribution has zero mass"};

  auto cdf = [&](double a) {
    if (a <= 0.0) return 0.0;
    if (a >= demo.domain.max_age) return 1.0;
    const double x = a / da;
    const int j = std::min(static_cast<int>(x), J - 1);
    const double w = x - j;
    return ((1.0 - w) * cum[j] + w * cum[j + 1]) / total;
  };

  std::vector<double> ages = traj.final_state.ages;
  std::sort(ages.begin(), ages.end());
  const double n = static_cast<double>(ages.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < ages.size(); ++i) {
    const double F = cdf(ages[i]);
    ks = std::max(ks, std::abs(F - static_cast<double>(i + 1) / n));
    ks = std::max(ks, std::abs(F - static_cast<double>(i) / n));
  }
  Outcome out;
  out.pass = ks <= 0.05;
  out.detail = "KS distance " + fmt(ks, 4) + " (<=0.05), population " +
               std::to_string(ages.size());
  return out;
}

// ---------------------------------------------------------------------------
// 6. Selection logic equals an exhaustive double-loop oracle on random tables.

std::size_t oracle_1d(const std::vector<double>& h, const std::vector<double>& e,
                      const std::vector<double>& V) {
  const std::size_t n = h.size();
  std::vector<double> crit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double A = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (h[j] <= h[i]) {
        const double d = e[i] - e[j];
        A = std::max(A, std::max(0.0, d * d - (V[i] + V[j])));
      }
    }
    crit[i] = A + V[i];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (crit[i] < crit[best] || (crit[i] == crit[best] && h[i] > h[best]))
      best = i;
  }
  return best;
}

std::size_t oracle_2d(const std::vector<std::array<double, 2>>& h,
                      const std::vector<double>& e, const std::vector<double>& V,
                      bool restrict_set) {
  const std::size_t n = h.size();
  std::vector<double> crit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double A = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool in_set =
          !restrict_set || (h[j][0] <= h[i][0] && h[j][1] <= h[i][1]);
      if (in_set) {
        const double d = e[i] - e[j];
        A = std::max(A, std::max(0.0, d * d - (V[i] + V[j])));
      }
    }
    crit[i] = A + V[i];
  }
  auto better = [&](std::size_t i, std::size_t best) {
    if (crit[i] != crit[best]) return crit[i] < crit[best];
    const double pi = h[i][0] * h[i][1], pb = h[best][0] * h[best][1];
    if (pi != pb) return pi > pb;
    return h[i][0] > h[best][0];
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (better(i, best)) best = i;
  return best;
}

Outcome criterion_gl_bruteforce() {
  std::mt19937_64 rng(20240817ULL);
  std::uniform_real_distribution<double> uh(0.01, 0.95);
  std::normal_distribution<double> ne(0.0, 1.5);
  std::uniform_real_distribution<double> uv(1e-4, 0.8);

  int matches = 0, total = 0;

  // 50 univariate tables, including exact-tie tables.
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng() % 29);
    std::set<double> hs;
    while (hs.size() < n) hs.insert(uh(rng));
    std::vector<double> h(hs.begin(), hs.end());
    std::vector<double> e(n), V(n);
    if (t % 10 == 9) {
      std::fill(e.begin(), e.end(), 0.7);
      std::fill(V.begin(), V.end(), 0.3);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = ne(rng);
        V[i] = uv(rng);
      }
    }
    ++total;
    if (gl_select_from_tables_1d(h, e, V) == oracle_1d(h, e, V)) ++matches;
  }

  // 50 bivariate tables over product lattices, alternating comparison set;
  // some tables with exact ties.
  for (int t = 0; t < 50; ++t) {
    const std::size_t n1 = 2 + static_cast<std::size_t>(rng() % 5);
    const std::size_t n2 = 2 + static_cast<std::size_t>(rng() % 4);
    std::set<double> s1, s2;
    while (s1.size() < n1) s1.insert(uh(rng));
    while (s2.size() < n2) s2.insert(uh(rng));
    std::vector<std::array<double, 2>> h;
    for (double a : s1)
      for (double b : s2) h.push_back({a, b});
    const std::size_t n = h.size();
    std::vector<double> e(n), V(n);
    if (t % 10 == 9) {
      std::fill(e.begin(), e.end(), -0.2);
      std::fill(V.begin(), V.end(), 0.15);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = ne(rng);
        V[i] = uv(rng);
      }
    }
    const bool restrict_set = (t % 2 == 0);
    ++total;
    if (gl_select_from_tables_2d(h, e, V, restrict_set) ==
        oracle_2d(h, e, V, restrict_set))
      ++matches;
  }

  Outcome out;
  out.pass = (matches == total) && (total == 100);
  out.detail = std::to_string(matches) + "/" + std::to_string(total) +
               " selections match the exhaustive oracle";
  return out;
}

// ---------------------------------------------------------------------------
// 7 & 8. The full preset-study convergence run, shared between criteria.

std::vector<RateRegressionResult> g_study;
bool g_study_ok = false;

const RateRegressionResult* find_row(Target target, double t, double a) {
  for (const auto& row : g_study)
    if (row.target == target && std::abs(row.t - t) < 1e-9 &&
        std::abs(row.a - a) < 1e-9)
      return &row;
  return nullptr;
}

Outcome criterion_convergence_slopes() {
  ExperimentConfig cfg = section5_preset();
  cfg.threads = 1;
  g_study = run_convergence_study(cfg);
  g_study_ok = true;

  const RateRegressionResult* gd = find_row(Target::density, 16.08, 20.82);
  const RateRegressionResult* pi = find_row(Target::death_intensity, 14.07, 86.07);
  if (gd == nullptr || pi == nullptr)
    return {false, "tracked rows missing from the study"};

  auto in_band = [](double s) { return s < 0.0 && s >= -0.6 && s <= -0.15; };
  Outcome out;
  out.pass = in_band(gd->slope) && in_band(pi->slope);
  out.detail = "density slope " + fmt(gd->slope, 4) + ", numerator slope " +
               fmt(pi->slope, 4) + " (band [-0.6,-0.15])";
  return out;
}

Outcome criterion_oracle_inequality() {
  if (!g_study_ok) return {false, "convergence study unavailable"};
  double worst = 0.0;
  std::string worst_at;
  for (const auto& row : g_study) {
    for (const auto& pn : row.per_N) {
      if (pn.N != 4000) continue;
      const double ratio = pn.rmse_oracle > 0.0
                               ? pn.rmse_adaptive / pn.rmse_oracle
                               : (pn.rmse_adaptive > 0.0 ? 1e300 : 1.0);
      if (ratio > worst) {
        worst = ratio;
        worst_at = target_name(row.target) + "@(" + fmt(row.t, 4) + "," +
                   fmt(row.a, 4) + ")";
      }
    }
  }
  Outcome out;
  out.pass = worst <= 10.0;
  out.detail = "worst adaptive/oracle RMSE ratio " + fmt(worst, 4) + " at " +
               worst_at + " (<=10)";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Concentration medians decrease in N; empirical tails decay.
Outcome criterion_concentration_shape() {
  ExperimentConfig cfg = section5_preset();
  cfg.threads = 1;
  ConcentrationStudy study = run_concentration_study(cfg);

  bool monotone = true;
  for (std::size_t i = 1; i < study.rows.size(); ++i)
    if (!(study.rows[i].median < study.rows[i - 1].median)) monotone = false;
  bool decay = true;
  std::string meds, rates;
  for (const auto& row : study.rows) {
    if (!(row.decay_rate > 0.0)) decay = false;
    meds += (meds.empty() ? "" : ", ") + fmt(row.median, 4);
    rates += (rates.empty() ? "" : ", ") + fmt(row.decay_rate, 4);
  }
  Outcome out;
  out.pass = monotone && decay;
  out.detail = "medians {" + meds + "} decreasing=" + (monotone ? "yes" : "no") +
               "; tail decay rates {" + rates + "} all positive=" +
               (decay ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical experiment outputs across invocations and thread counts.

bool collect_tree(const fs::path& root, std::vector<fs::path>& rel) {
  if (!fs::exists(root)) return false;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      rel.push_back(fs::relative(entry.path(), root));
  std::sort(rel.begin(), rel.end());
  return true;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

std::string compare_trees(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> ra, rb;
  if (!collect_tree(a, ra)) return "missing tree " + a.string();
  if (!collect_tree(b, rb)) return "missing tree " + b.string();
  if (ra != rb) return "file lists differ";
  for (const auto& rel : ra)
    if (!same_bytes(a / rel, b / rel)) return "content differs: " + rel.string();
  return "";
}

Outcome criterion_determinism() {
  const char* cli = std::getenv("LEXIS_CLI");
  if (cli == nullptr || std::string(cli).empty())
    return {false, "LEXIS_CLI environment variable not set"};

  const fs::path base = fs::temp_directory_path() / "lexis_acceptance_det";
  std::error_code ec;
  fs::remove_all(base, ec);
  fs::create_directories(base);
  const fs::path da = base / "run_a", db = base / "run_b", dc = base / "run_c";

  auto invoke = [&](const fs::path& out, int threads) {
    std::ostringstream cmd;
    cmd << '"' << cli << '"'
        << " experiment --preset section5 --seed 42 --threads " << threads
        << " --out \"" << out.string() << "\" >/dev/null 2>&1";
    return std::system(cmd.str().c_str());
  };
  if (invoke(da, 1) != 0) return {false, "first invocation failed"};
  if (invoke(db, 1) != 0) return {false, "second invocation failed"};
  if (invoke(dc, 8) != 0) return {false, "8-thread invocation failed"};

  const std::string ab = compare_trees(da, db);
  if (!ab.empty()) return {false, "repeat run differs: " + ab};
  const std::string ac = compare_trees(da, dc);
  if (!ac.empty()) return {false, "thread-count run differs: " + ac};

  std::vector<fs::path> files;
  collect_tree(da, files);
  fs::remove_all(base, ec);
  Outcome out;
  out.pass = true;
  out.detail = "three runs byte-identical across " +
               std::to_string(files.size()) + " output files";
  return out;
}

}  // namespace

int main() {
  std::cout << "acceptance suite: simulation, limit solver, adaptive estimation"
            << std::endl;

  run_criterion(1, "pure-transport", 1.0, criterion_pure_transport);
  run_criterion(2, "pure-death-survival", 30.0, criterion_pure_death);
  run_criterion(3, "pure-birth-growth", 30.0, criterion_yule_mean);
  run_criterion(4, "renewal-closed-form", 5.0, criterion_renewal_closed_form);
  run_criterion(5, "particle-vs-limit-ks", 120.0, criterion_particle_vs_limit);
  run_criterion(6, "selection-bruteforce", 0.0, criterion_gl_bruteforce);
  run_criterion(7, "convergence-slopes", 7200.0, criterion_convergence_slopes);
  run_criterion(8, "oracle-inequality", 0.0, criterion_oracle_inequality);
  run_criterion(9, "concentration-shape", 0.0, criterion_concentration_shape);
  run_criterion(10, "output-determinism", 0.0, criterion_determinism);

  std::cout << (g_failures == 0 ? "all criteria passed"
                                : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
