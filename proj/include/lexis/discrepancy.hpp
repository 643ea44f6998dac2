#pragma once

// Weighted empirical discrepancies between the particle system and the
// deterministic limit, plus an empirical probe of the concentration tail.
//
// The discrepancy at time t compares, over a finite family of bounded test
// functions f, the weighted population average with the weighted limit
// integral:
//   (1/N) sum_i w2(t - a_i) f(t, a_i)  -  integral_a w2(t - a) f(t, a) g(t, a).
// Taking the maximum of absolute values over the family realizes the
// supremum over a negation-closed class.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lexis/kernels.hpp"
#include "lexis/model.hpp"
#include "lexis/renewal.hpp"
#include "lexis/simulate.hpp"

namespace lexis {

struct TestFunction {
  std::string label;
  std::function<double(double, double)> eval;  // f(t, a)
  double declared_sup = 1.0;                   // bound on |f|
};

// Finite, negation-closed (via absolute values) stand-in for the test class.
struct TestFunctionFamily {
  std::vector<TestFunction> members;
};

// Constants, the model's scaled rates, and a few Lipschitz bumps.
TestFunctionFamily default_family(const RateField& rates, const Domain& domain);

// Samples each member on a grid over [0,T]x[0,max_age] and throws
// std::runtime_error if any |f| exceeds its declared sup by more than 1e-9.
void spot_check_bounds(const TestFunctionFamily& family, const Domain& domain,
                       std::size_t grid = 64);

// A bounded weight with recorded norms and (for w2) compact support.
struct Weight {
  std::string label;
  std::function<double(double)> eval;
  double norm_1 = 0.0;    // L1 norm of |w|
  double norm_inf = 0.0;  // sup norm
  double support_lo = 0.0;
  double support_hi = 0.0;
};

struct WeightPair {
  Weight w1;  // time weight for the integrated discrepancy
  Weight w2;  // compactly supported age-cohort weight
};

// w(x) = K_h(center - x) when reflected (so the weighted population average
// at time t with center = t - a reproduces the density estimator at (t, a)),
// otherwise w(x) = K_h(x - center). Norms come from the kernel's exact norms.
Weight weight_from_kernel(const Kernel1D& k, double h, double center,
                          bool reflected = true);

// Boxcar weight: `value` on [lo, hi], zero outside.
Weight constant_weight(double value, double lo, double hi);

// Geometric mean of the recorded norms, the normalization scale for
// concentration samples.
double weight_interp_norm(const Weight& w);

// Deterministic half of the discrepancy: the limit integrals, one per family
// member, for a fixed (w2, t). Reused across replications.
struct DiscrepancyBaseline {
  double t = 0.0;
  std::vector<double> limit_integrals;
};

DiscrepancyBaseline discrepancy_baseline(const RenewalSolution& sol,
                                         const Weight& w2,
                                         const TestFunctionFamily& family,
                                         double t, std::size_t panels = 2048);

// max over the family of |empirical average - limit integral| at time t.
double weighted_discrepancy_at(const PopulationState& snapshot,
                               const DiscrepancyBaseline& baseline,
                               const Weight& w2,
                               const TestFunctionFamily& family);
double weighted_discrepancy_at(const PopulationState& snapshot,
                               const RenewalSolution& sol, const Weight& w2,
                               const TestFunctionFamily& family, double t,
                               std::size_t panels = 2048);

// Time-trapezoid of w1(s) times the signed bracket over the trajectory's
// snapshot lattice, then max over the family of absolute values. Needs at
// least two snapshots. When the lattice spacing exceeds the support length
// of w2, a warning goes to stderr (and *spacing_warning if supplied).
double integrated_discrepancy(const Trajectory& traj,
                              const RenewalSolution& sol, const Weight& w1,
                              const Weight& w2,
                              const TestFunctionFamily& family,
                              std::size_t panels = 2048,
                              bool* spacing_warning = nullptr);

// Theoretical tail envelope 1/(e^u - 1); +infinity at u = 0.
double tail_envelope(double u);

struct TailRow {
  double u = 0.0;
  double empirical = 0.0;
  double envelope = 0.0;
};

// For each u, the empirical frequency of {sample >= 1 + u} among samples that
// were already normalized by the weight scale and a rate, next to the
// envelope.
std::vector<TailRow> concentration_tail(const std::vector<double>& normalized_samples,
                                        const std::vector<double>& u_grid);

// Smallest rate r such that the empirical tail of samples/r stays below the
// envelope at every grid point (grid points with envelope >= 1 impose no
// constraint). Zero when the grid constrains nothing or all samples are <= 0.
double fitted_rate(const std::vector<double>& samples,
                   const std::vector<double>& u_grid);

// Exponential decay rate of the empirical tail: minus the least-squares
// slope of log(empirical) against u over rows with u > 0 and a positive
// empirical frequency. Returns +infinity when fewer than two such rows
// exist (the tail vanishes immediately).
double tail_decay_rate(const std::vector<TailRow>& rows);

// CSV table "u,empirical_tail,envelope".
void write_tail_table(const std::filesystem::path& path,
                      const std::vector<TailRow>& rows);

}  // namespace lexis
