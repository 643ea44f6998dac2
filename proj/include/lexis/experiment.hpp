#pragma once

// Monte Carlo study harness: pointwise
// confidence bands, adaptive-versus-oracle error tables with convergence
// regressions, and the concentration-tail probe, plus output persistence.
//
// Determinism contract: every replication unit draws its randomness from a
// seed stream derived from (root seed, study index, unit index); results land
// in preallocated slots and all reductions run in a fixed order, so outputs
// are byte-identical across repeated runs and across thread counts.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lexis/config.hpp"
#include "lexis/discrepancy.hpp"
#include "lexis/estimation.hpp"
#include "lexis/renewal.hpp"

namespace lexis {

enum class Target { density, death_intensity, death_rate };
std::string target_name(Target target);

// Position relative to the diagonal {t = a}: above it (a > t) only initial
// individuals contribute; below it, individuals born during the run do.
enum class Region { upper, lower };
Region region_of(double t, double a);

struct ExponentSummary {
  double s = 0.0;       // attainable smoothness exponent for the region
  double rate = 0.0;    // s / (2s + 1)
  double s_lower = 0.0; // minimax lower-bound exponent
};

// Smoothness exponents: for the density, s = max(min(gamma, delta+1), delta)
// above the diagonal and min(alpha, beta, gamma+1, delta) below; for the
// death targets, the harmonic combination 1/s = 1/min(gamma,delta) + 1/s_a
// with s_a = delta above and min(alpha, beta, gamma+1, delta) below. Lower
// bounds: max(gamma, delta) for the density, harmonic mean of gamma and
// delta for the death targets. All parameters must be positive.
ExponentSummary theoretical_exponent(Target target, Region region, double alpha,
                                     double beta, double gamma, double delta);

// Linear-interpolation (type-7) empirical quantile, p in [0, 1].
double empirical_quantile(std::vector<double> values, double p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of y on x; needs at least two points.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// --- Pointwise confidence bands -------------------------------------------

struct CIRow {
  std::string estimator;  // g_adaptive, g_oracle, pi_adaptive, pi_oracle,
                          // mu_adaptive, mu_oracle
  double t = 0.0, a = 0.0;
  double varpi = 0.0;     // density floor for mu rows, 0 otherwise
  double truth = 0.0;
  double mean = 0.0, q025 = 0.0, q975 = 0.0;
};

struct CIStudy {
  std::vector<CIRow> rows;
};

CIStudy run_pointwise_ci(const ExperimentConfig& cfg);

// --- Convergence study ------------------------------------------------------

struct RatePointRow {
  long long N = 0;
  double rmse_adaptive = 0.0;
  double rmse_oracle = 0.0;
};

struct RateRegressionResult {
  Target target = Target::density;
  double t = 0.0, a = 0.0;
  double slope = 0.0;      // OLS slope of ln RMSE (adaptive) on ln N
  double intercept = 0.0;
  double oracle_slope = 0.0;
  double oracle_intercept = 0.0;
  ExponentSummary theory;
  std::vector<RatePointRow> per_N;
};

std::vector<RateRegressionResult> run_convergence_study(const ExperimentConfig& cfg);

// --- Concentration-tail study ----------------------------------------------

struct ConcentrationRow {
  long long N = 0;
  double median = 0.0;       // of weight-normalized discrepancy samples
  double fitted_rate = 0.0;  // smallest rate satisfying the envelope
  double decay_rate = 0.0;   // exponential decay of the empirical tail in u
};

struct ConcentrationStudy {
  std::vector<ConcentrationRow> rows;
  std::vector<std::vector<TailRow>> tails;      // one table per N
  std::vector<std::vector<double>> samples;     // weight-normalized, per N
};

ConcentrationStudy run_concentration_study(const ExperimentConfig& cfg);

// --- Persistence -------------------------------------------------------------

// Writes manifest.txt: tool version, seed, config hash, canonical config.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg);

// Full experiment: limit truth check, convergence study, confidence bands,
// CSV tables and quick-look charts under cfg.output_dir.
void run_experiment(const ExperimentConfig& cfg);

// Concentration diagnostics (tail tables, medians, one integrated
// discrepancy sample) under cfg.output_dir.
void run_diagnostics(const ExperimentConfig& cfg);

}  // namespace lexis
