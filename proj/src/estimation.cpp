#include "lexis/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lexis {

namespace {

void check_scale(double scale_N) {
  if (!(scale_N >= 2.0))
    throw std::invalid_argument("bandwidth bracket needs a scale of at least 2");
}

double bracket_lo(double scale_N) { return 1.0 / std::sqrt(scale_N); }
double bracket_hi(double scale_N) { return 1.0 / std::log(scale_N); }

}  // namespace

BandwidthGrid geometric_grid(double scale_N, std::size_t points) {
  check_scale(scale_N);
  if (points == 0) throw std::invalid_argument("geometric_grid: need points >= 1");
  const double lo = bracket_lo(scale_N);
  const double hi = bracket_hi(scale_N);
  const auto cap = static_cast<std::size_t>(scale_N);
  const std::size_t m = std::min(points, cap);
  BandwidthGrid grid;
  grid.scale_N = scale_N;
  if (m == 1) {
    grid.values.push_back(hi);
  } else {
    grid.values.resize(m);
    const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(m - 1));
    grid.values.front() = lo;
    for (std::size_t i = 1; i + 1 < m; ++i)
      grid.values[i] = lo * std::pow(ratio, static_cast<double>(i));
    grid.values.back() = hi;
  }
  validate_grid(grid);
  return grid;
}

BandwidthGrid uniform_grid(double scale_N) {
  check_scale(scale_N);
  const double lo = bracket_lo(scale_N);
  const double hi = bracket_hi(scale_N);
  auto count =
      static_cast<std::size_t>(std::ceil((hi - lo) * scale_N)) + 1;
  count = std::min(count, static_cast<std::size_t>(scale_N));
  BandwidthGrid grid;
  grid.scale_N = scale_N;
  if (count <= 1) {
    grid.values.push_back(hi);
  } else {
    grid.values.resize(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    grid.values.front() = lo;
    for (std::size_t i = 1; i + 1 < count; ++i)
      grid.values[i] = lo + step * static_cast<double>(i);
    grid.values.back() = hi;
  }
  validate_grid(grid);
  return grid;
}

void validate_grid(const BandwidthGrid& grid) {
  check_scale(grid.scale_N);
  if (grid.values.empty())
    throw std::invalid_argument("bandwidth grid: empty");
  if (grid.values.size() > static_cast<std::size_t>(grid.scale_N))
    throw std::invalid_argument("bandwidth grid: cardinality exceeds the scale");
  const double lo = bracket_lo(grid.scale_N) * (1.0 - 1e-12);
  const double hi = bracket_hi(grid.scale_N) * (1.0 + 1e-12);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double h = grid.values[i];
    if (!(h >= lo && h <= hi))
      throw std::invalid_argument(
          "bandwidth grid: value " + std::to_string(h) +
          " outside [scale^{-1/2}, 1/log(scale)]");
    if (i > 0 && !(grid.values[i - 1] < h))
      throw std::invalid_argument("bandwidth grid: values must be strictly increasing");
  }
}

double estimate_density(const PopulationState& snapshot, const Kernel1D& k,
                        double h, double a) {
  if (!(h > 0.0)) throw std::invalid_argument("estimate_density: h must be positive");
  if (!(snapshot.scale_N > 0.0))
    throw std::invalid_argument("estimate_density: scale_N must be positive");
  double sum = 0.0;
  for (double ai : snapshot.ages) sum += eval_scaled(k, h, ai - a);
  return sum / snapshot.scale_N;
}

double estimate_pi(const std::vector<DeathRecord>& deaths,
                   const SkewedProductKernel& pk, double h1, double h2,
                   double t, double a, double scale_N) {
  if (!(h1 > 0.0 && h2 > 0.0))
    throw std::invalid_argument("estimate_pi: bandwidths must be positive");
  if (!(scale_N > 0.0))
    throw std::invalid_argument("estimate_pi: scale_N must be positive");
  double sum = 0.0;
  for (const auto& d : deaths)
    sum += eval_skewed(pk, h1, h2, d.time - t, d.age - a);
  return sum / scale_N;
}

double variance_term_1d(const Kernel1D& k, double h, double scale_N,
                        double c_star) {
  check_scale(scale_N);
  if (!(h > 0.0)) throw std::invalid_argument("variance_term_1d: h must be positive");
  if (!(c_star > 0.0))
    throw std::invalid_argument("variance_term_1d: c_star must be positive");
  const double bracket = 4.0 * std::log(scale_N) * c_star /
                         std::sqrt(scale_N) * interp_norm(k, h);
  return bracket * bracket;
}

double variance_term_2d(const Kernel1D& H, const Kernel1D& K, double h1,
                        double h2, double scale_N, double c_star) {
  check_scale(scale_N);
  if (!(h1 > 0.0 && h2 > 0.0))
    throw std::invalid_argument("variance_term_2d: bandwidths must be positive");
  if (!(c_star > 0.0))
    throw std::invalid_argument("variance_term_2d: c_star must be positive");
  const double bracket = 4.0 * std::log(scale_N) * c_star /
                         std::sqrt(scale_N) * interp_norm(H, h1) *
                         interp_norm(K, h2);
  return bracket * bracket;
}

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void check_table_sizes(std::size_t nh, std::size_t ne, std::size_t nv) {
  if (nh == 0) throw std::invalid_argument("selection table: empty grid");
  if (ne != nh || nv != nh)
    throw std::invalid_argument("selection table: mismatched column lengths");
}

}  // namespace

std::size_t gl_select_from_tables_1d(const std::vector<double>& h,
                                     const std::vector<double>& estimates,
                                     const std::vector<double>& V,
                                     std::vector<double>* A_out) {
  check_table_sizes(h.size(), estimates.size(), V.size());
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!(h[i - 1] < h[i]))
      throw std::invalid_argument("selection table: bandwidths must be strictly increasing");
  const std::size_t m = h.size();
  std::vector<double> A(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      const double d = estimates[i] - estimates[j];
      worst = std::max(worst, positive_part(d * d - (V[i] + V[j])));
    }
    A[i] = worst;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (A[i] + V[i] <= A[best] + V[best]) best = i;
  if (A_out) *A_out = std::move(A);
  return best;
}

std::size_t gl_select_from_tables_2d(
    const std::vector<std::array<double, 2>>& h,
    const std::vector<double>& estimates, const std::vector<double>& V,
    bool order_restrict, std::vector<double>* A_out) {
  check_table_sizes(h.size(), estimates.size(), V.size());
  const std::size_t m = h.size();
  for (const auto& hh : h)
    if (!(hh[0] > 0.0 && hh[1] > 0.0))
      throw std::invalid_argument("selection table: bandwidths must be positive");
  std::vector<double> A(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (order_restrict && !(h[j][0] <= h[i][0] && h[j][1] <= h[i][1]))
        continue;
      const double d = estimates[i] - estimates[j];
      worst = std::max(worst, positive_part(d * d - (V[i] + V[j])));
    }
    A[i] = worst;
  }
  std::size_t best = 0;
  auto better = [&](std::size_t i, std::size_t b) {
    const double ci = A[i] + V[i], cb = A[b] + V[b];
    if (ci != cb) return ci < cb;
    const double pi = h[i][0] * h[i][1], pb = h[b][0] * h[b][1];
    if (pi != pb) return pi > pb;
    return h[i][0] > h[b][0];
  };
  for (std::size_t i = 1; i < m; ++i)
    if (better(i, best)) best = i;
  if (A_out) *A_out = std::move(A);
  return best;
}

EstimateReport gl_select_density(const PopulationState& snapshot,
                                 const BandwidthGrid& grid, const Kernel1D& k,
                                 const GLConfig& cfg, double t, double a) {
  validate_grid(grid);
  if (std::abs(snapshot.time - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument(
        "gl_select_density: snapshot time does not match the requested t");
  if (std::abs(snapshot.scale_N - grid.scale_N) >
      1e-9 * std::max(1.0, grid.scale_N))
    throw std::invalid_argument(
        "gl_select_density: grid was built for a different population scale");
  if (!(cfg.c_star > 0.0))
    throw std::invalid_argument("gl_select_density: c_star must be positive");
  const std::size_t m = grid.values.size();
  std::vector<double> est(m), V(m), A;
  for (std::size_t i = 0; i < m; ++i) {
    est[i] = estimate_density(snapshot, k, grid.values[i], a);
    V[i] = variance_term_1d(k, grid.values[i], grid.scale_N, cfg.c_star);
  }
  const std::size_t sel = gl_select_from_tables_1d(grid.values, est, V, &A);
  EstimateReport report;
  report.value = est[sel];
  report.selected_bandwidths = {grid.values[sel]};
  report.selected_index = sel;
  report.rows.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.rows[i].h = {grid.values[i], 0.0};
    report.rows[i].estimate = est[i];
    report.rows[i].A = A[i];
    report.rows[i].V = V[i];
  }
  return report;
}

EstimateReport gl_select_pi(const std::vector<DeathRecord>& deaths,
                            const BandwidthGrid2& grid2,
                            const SkewedProductKernel& pk, const GLConfig& cfg,
                            double t, double a, double scale_N) {
  validate_grid(grid2.time);
  validate_grid(grid2.age);
  if (std::abs(grid2.time.scale_N - scale_N) > 1e-9 * std::max(1.0, scale_N) ||
      std::abs(grid2.age.scale_N - scale_N) > 1e-9 * std::max(1.0, scale_N))
    throw std::invalid_argument(
        "gl_select_pi: grids were built for a different population scale");
  if (!(cfg.c_star > 0.0))
    throw std::invalid_argument("gl_select_pi: c_star must be positive");
  const std::size_t m1 = grid2.time.values.size();
  const std::size_t m2 = grid2.age.values.size();
  const std::size_t m = m1 * m2;
  std::vector<std::array<double, 2>> hh(m);
  std::vector<double> est(m), V(m), A;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < m1; ++i) {
    const double h1 = grid2.time.values[i];
    for (std::size_t j = 0; j < m2; ++j, ++idx) {
      const double h2 = grid2.age.values[j];
      hh[idx] = {h1, h2};
      est[idx] = estimate_pi(deaths, pk, h1, h2, t, a, scale_N);
      V[idx] = variance_term_2d(pk.time_kernel, pk.age_kernel, h1, h2,
                                scale_N, cfg.c_star);
    }
  }
  const std::size_t sel = gl_select_from_tables_2d(
      hh, est, V, cfg.order_restrict_bivariate, &A);
  EstimateReport report;
  report.value = est[sel];
  report.selected_bandwidths = {hh[sel][0], hh[sel][1]};
  report.selected_index = sel;
  report.rows.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.rows[i].h = hh[i];
    report.rows[i].estimate = est[i];
    report.rows[i].A = A[i];
    report.rows[i].V = V[i];
  }
  return report;
}

double estimate_mu(const EstimateReport& g_report,
                   const EstimateReport& pi_report, double varpi) {
  if (!(varpi > 0.0)) throw std::invalid_argument("estimate_mu: varpi must be positive");
  return pi_report.value / std::max(g_report.value, varpi);
}

double oracle_bandwidth(double truth,
                        const std::map<double, double>& estimates_by_h) {
  if (estimates_by_h.empty())
    throw std::invalid_argument("oracle_bandwidth: empty table");
  double best_h = 0.0;
  double best_err = 0.0;
  bool first = true;
  for (const auto& [h, value] : estimates_by_h) {
    const double err = std::abs(value - truth);
    if (first || err <= best_err) {
      best_h = h;
      best_err = err;
      first = false;
    }
  }
  return best_h;
}

double calibrate_cstar(
    const std::function<std::size_t(double)>& selected_index_for_cstar,
    std::size_t grid_cardinality, double initial_cstar, double factor,
    int max_rounds) {
  if (!(initial_cstar > 0.0))
    throw std::invalid_argument("calibrate_cstar: initial c_star must be positive");
  if (!(factor > 1.0))
    throw std::invalid_argument("calibrate_cstar: factor must exceed 1");
  if (grid_cardinality < 3) return initial_cstar;  // no interior point exists
  double c = initial_cstar;
  for (int round = 0; round < max_rounds; ++round) {
    const std::size_t idx = selected_index_for_cstar(c);
    if (idx >= grid_cardinality)
      throw std::logic_error("calibrate_cstar: callback returned an index off the grid");
    if (idx == grid_cardinality - 1)
      c /= factor;  // stuck at the widest bandwidth: variance majorant too big
    else if (idx == 0)
      c *= factor;  // stuck at the narrowest: majorant too small
    else
      return c;
  }
  return c;
}

}  // namespace lexis
