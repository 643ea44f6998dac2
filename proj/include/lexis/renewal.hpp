#pragma once

#include <vector>

#include "lexis/model.hpp"

namespace lexis {

// Integrated death rate along a characteristic line: the integral over
// s in [t0, t1] of death(s, s + cohort_offset), computed by composite
// trapezoid with step <= max_step. The age argument is clamped inside the
// rate field. This is the exponent of the survival factor between t0 and t1
// for the cohort whose age at time s is s + cohort_offset.
double survival_exponent(const RateField& rates, double t0, double t1,
                         double cohort_offset, double max_step);

// Newborn flux B on a uniform time grid, obtained from the renewal
// (Volterra) equation; `dt` is the grid step actually used (the requested
// step rounded to the nearest exact divisor of the horizon). Evaluation of
// the transported density goes through limit_density below.
class RenewalSolution {
 public:
  RenewalSolution(double dt, std::vector<double> B, Domain domain, RateField rates,
                  InitialDensity initial);

  double dt() const { return dt_; }
  const std::vector<double>& B_values() const { return B_; }
  const Domain& domain() const { return domain_; }
  const RateField& rates() const { return rates_; }
  const InitialDensity& initial() const { return initial_; }

  // Linear interpolation of B on the grid, t in [0, horizon].
  double birth_at(double t) const;

 private:
  double dt_;
  std::vector<double> B_;
  Domain domain_;
  RateField rates_;
  InitialDensity initial_;
};

// Time-steps the renewal equation
//   B(t) = M(t) + integral_0^t B(a) L(t, t - a) da
// with trapezoid quadrature in both the source term M and the convolution,
// solving the implicit diagonal term exactly at each step. Throws if the
// diagonal factor 1 - (dt/2) L(t, 0) is not positive (then dt must shrink
// below 2 / birth(t, 0)). The requested dt is rounded to the nearest exact
// divisor of the horizon.
RenewalSolution solve_renewal(const RateField& rates, const InitialDensity& initial,
                              const Domain& domain, double dt);

// Density of the large-population limit at (t, a): the initial profile
// transported along characteristics above the diagonal, the newborn flux
// transported below it, zero on the diagonal itself by convention. Inputs
// outside [0, horizon] x [0, max_age] are rejected.
double limit_density(const RenewalSolution& sol, double t, double a);

// death(t, a) * limit_density(t, a).
double limit_death_intensity(const RenewalSolution& sol, double t, double a);

}  // namespace lexis
