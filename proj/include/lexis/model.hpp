#pragma once

#include <functional>
#include <vector>

#include "lexis/rng.hpp"

namespace lexis {

// Time-age rectangle [0, horizon_T] x [0, max_age].
struct Domain {
  double horizon_T = 0.0;
  double max_age = 0.0;
};

// Birth and death rate fields on the domain together with certified upper
// bounds. Evaluators clamp the age argument to [0, max_age]: individuals
// that outlive max_age keep the boundary rates. An optional certified age
// window outside of which the birth rate vanishes lets downstream quadrature
// skip cohorts that can never reproduce; it never changes values.
class RateField {
 public:
  using Fn = std::function<double(double, double)>;

  RateField(Fn birth, double birth_sup, Fn death, double death_sup, double max_age);

  double birth(double t, double a) const { return birth_(t, clamp_age(a)); }
  double death(double t, double a) const { return death_(t, clamp_age(a)); }

  double birth_sup() const { return birth_sup_; }
  double death_sup() const { return death_sup_; }
  double max_age() const { return max_age_; }

  void declare_birth_age_support(double lo, double hi);
  bool has_birth_age_support() const { return has_birth_window_; }
  double birth_age_lo() const { return birth_window_lo_; }
  double birth_age_hi() const { return birth_window_hi_; }

  // True when b(t, a) = 0 for every t >= 0 for a cohort of initial age `u`
  // (only ever true when a certified window was declared).
  bool birth_vanishes_beyond(double u) const {
    return has_birth_window_ && birth_window_hi_ < max_age_ && u > birth_window_hi_;
  }

 private:
  double clamp_age(double a) const {
    if (a < 0.0) return 0.0;
    if (a > max_age_) return max_age_;
    return a;
  }

  Fn birth_, death_;
  double birth_sup_, death_sup_, max_age_;
  bool has_birth_window_ = false;
  double birth_window_lo_ = 0.0, birth_window_hi_ = 0.0;
};

// Initial age profile with certified total mass and sup norm. Sampling uses
// the inverse of a cumulative table built by composite Simpson quadrature on
// a uniform age grid over the declared support (resolution = table_panels).
class InitialDensity {
 public:
  InitialDensity(std::function<double(double)> density, double total_mass,
                 double sup_norm, double support_lo, double support_hi,
                 int table_panels = 8192);

  double density(double a) const {
    return (a < support_lo_ || a > support_hi_) ? 0.0 : density_(a);
  }
  double total_mass() const { return total_mass_; }
  double sup_norm() const { return sup_norm_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }

  // Inverse CDF of the mass-normalized profile, u in [0,1].
  double quantile(double u) const;
  double sample(Rng& rng) const { return quantile(rng.uniform01()); }

  const std::vector<double>& cdf_table() const { return cdf_; }
  double table_step() const { return step_; }

 private:
  std::function<double(double)> density_;
  double total_mass_, sup_norm_, support_lo_, support_hi_;
  double step_;
  std::vector<double> cdf_;  // normalized CDF at support_lo + i*step_
};

// Gaussian(mean, variance) conditioned to [lo, hi], unit mass.
InitialDensity truncated_gaussian_density(double mean, double variance, double lo,
                                          double hi);

struct Demography {
  Domain domain;
  RateField rates;
  InitialDensity initial;
};

// The built-in demography: horizon 20, ages up to 120; death rate
// 0.04 exp(0.0074 a) exp(-0.005 t); birth rate `amplitude` on the closed age
// window [window_lo, window_hi]; initial ages Gaussian(40, 152) conditioned
// to [0, 120].
Demography builtin_demography(double window_lo = 20.0, double window_hi = 40.0,
                              double birth_amplitude = 1.0);

}  // namespace lexis
