#pragma once

// Kernel estimators for the age density and the death intensity numerator,
// together with the Goldenshluger-Lepski data-driven bandwidth selection.
//
// Conventions used throughout this header:
//   * N denotes the population scale (PopulationState::scale_N); the measure
//     normalization 1/N is applied inside the estimators, including the death
//     numerator, so that pi_hat targets mu*g directly.
//   * log N means the natural logarithm.
//   * Bandwidth grids live inside [N^{-1/2}, 1/log N].

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "lexis/kernels.hpp"
#include "lexis/simulate.hpp"

namespace lexis {

// Sorted bandwidth lattice tied to the population scale it was built for.
// Invariants (enforced by the factories and re-checked by the selectors):
// values strictly increasing, each inside [N^{-1/2}, 1/log N] up to rounding,
// cardinality at most N.
struct BandwidthGrid {
  std::vector<double> values;
  double scale_N = 0.0;
};

// Geometric lattice with `points` nodes (clamped to the cardinality cap)
// spanning the admissible bracket; endpoints are hit exactly.
BandwidthGrid geometric_grid(double scale_N, std::size_t points = 30);

// Uniform lattice with spacing at most 1/N, the dense "fidelity" variant.
BandwidthGrid uniform_grid(double scale_N);

// Validates the grid invariants; throws std::invalid_argument on violation.
void validate_grid(const BandwidthGrid& grid);

// Pair of lattices for the bivariate selection: one per coordinate
// (time bandwidth h1, age bandwidth h2).
struct BandwidthGrid2 {
  BandwidthGrid time;
  BandwidthGrid age;
};

struct GLConfig {
  double c_star = 0.1;  // upper-bound constant in the variance majorant
  double varpi = 0.01;  // density floor in the mu quotient
  // Comparison set for the bivariate A statistic: componentwise h' <= h when
  // true (the proof's set), every grid pair when false (the displayed set).
  bool order_restrict_bivariate = true;
};

// One grid node of a selection table. h[1] is unused (zero) for univariate
// tables.
struct GLTableRow {
  std::array<double, 2> h{0.0, 0.0};
  double estimate = 0.0;
  double A = 0.0;
  double V = 0.0;
};

// Result of a data-driven selection: the chosen estimate, the chosen
// bandwidth(s), and the full comparison table for reporting.
struct EstimateReport {
  double value = 0.0;
  std::vector<double> selected_bandwidths;  // size 1 (density) or 2 (pi)
  std::vector<GLTableRow> rows;
  std::size_t selected_index = 0;
};

// Age-density estimator at age a from one population snapshot:
//   (1/N) sum_i K_h(a_i - a).
double estimate_density(const PopulationState& snapshot, const Kernel1D& k,
                        double h, double a);

// Death-numerator estimator at (t, a) from the death record list:
//   (1/N) sum_i H_{h1}(T_i - t) K_{h2}((T_i - t) - (A_i - a))
// when pk.skew is on; the unskewed variant evaluates K_{h2}(A_i - a).
double estimate_pi(const std::vector<DeathRecord>& deaths,
                   const SkewedProductKernel& pk, double h1, double h2,
                   double t, double a, double scale_N);

// Variance majorants:
//   V_h     = (4 log(N) c_star N^{-1/2} |K_h|_{1,inf})^2,
//   V_{h1,h2} = (4 log(N) c_star N^{-1/2} |H_{h1}|_{1,inf} |K_{h2}|_{1,inf})^2,
// with |K_h|_{1,inf} = sqrt(|K|_1 |K|_inf / h). Requires N >= 2.
double variance_term_1d(const Kernel1D& k, double h, double scale_N,
                        double c_star);
double variance_term_2d(const Kernel1D& H, const Kernel1D& K, double h1,
                        double h2, double scale_N, double c_star);

// Core of the selection rule, operating on precomputed tables so the logic
// can be exercised against brute-force oracles. Bandwidths must be strictly
// increasing. For each i,
//   A_i = max_{j: h_j <= h_i} ((e_i - e_j)^2 - (V_i + V_j))_+,
// and the selected index minimizes A_i + V_i, ties resolved toward the
// largest bandwidth. A_out (optional) receives the A table.
std::size_t gl_select_from_tables_1d(const std::vector<double>& h,
                                     const std::vector<double>& estimates,
                                     const std::vector<double>& V,
                                     std::vector<double>* A_out = nullptr);

// Bivariate variant over arbitrary (h1, h2) pairs. The comparison set is
// {j : h_j <= h_i componentwise} when order_restrict is true, otherwise all
// pairs. Ties resolve toward the largest product h1*h2, then the largest h1.
std::size_t gl_select_from_tables_2d(
    const std::vector<std::array<double, 2>>& h,
    const std::vector<double>& estimates, const std::vector<double>& V,
    bool order_restrict, std::vector<double>* A_out = nullptr);

// Data-driven density estimate at age a. The snapshot must sit at time t
// (the parameter is kept for reporting and is checked for consistency).
EstimateReport gl_select_density(const PopulationState& snapshot,
                                 const BandwidthGrid& grid, const Kernel1D& k,
                                 const GLConfig& cfg, double t, double a);

// Data-driven death-numerator estimate at (t, a) over the product lattice.
EstimateReport gl_select_pi(const std::vector<DeathRecord>& deaths,
                            const BandwidthGrid2& grid2,
                            const SkewedProductKernel& pk, const GLConfig& cfg,
                            double t, double a, double scale_N);

// Quotient estimator with density floor: pi.value / max(g.value, varpi).
double estimate_mu(const EstimateReport& g_report,
                   const EstimateReport& pi_report, double varpi);

// Bandwidth whose estimate is closest to a known truth (from the limit
// solver); ties resolve toward the largest bandwidth.
double oracle_bandwidth(double truth,
                        const std::map<double, double>& estimates_by_h);

// Scales c_star by `factor` (halving when the selection sticks to the top of
// the grid, multiplying when it sticks to the bottom) until the selected
// index returned by the callback is interior, giving up after max_rounds.
// Returns the final c_star.
double calibrate_cstar(
    const std::function<std::size_t(double)>& selected_index_for_cstar,
    std::size_t grid_cardinality, double initial_cstar, double factor = 2.0,
    int max_rounds = 60);

}  // namespace lexis
