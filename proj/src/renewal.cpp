#include "lexis/renewal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lexis {

double survival_exponent(const RateField& rates, double t0, double t1,
                         double cohort_offset, double max_step) {
  if (!(max_step > 0.0))
    throw std::invalid_argument("survival_exponent: step must be positive");
  if (t1 < t0) throw std::invalid_argument("survival_exponent: need t1 >= t0");
  if (t1 == t0) return 0.0;
  const int n = static_cast<int>(std::ceil((t1 - t0) / max_step));
  const double h = (t1 - t0) / n;
  double acc = 0.5 * (rates.death(t0, t0 + cohort_offset) +
                      rates.death(t1, t1 + cohort_offset));
  for (int i = 1; i < n; ++i) {
    const double s = t0 + i * h;
    acc += rates.death(s, s + cohort_offset);
  }
  return acc * h;
}

RenewalSolution::RenewalSolution(double dt, std::vector<double> B, Domain domain,
                                 RateField rates, InitialDensity initial)
    : dt_(dt),
      B_(std::move(B)),
      domain_(domain),
      rates_(std::move(rates)),
      initial_(std::move(initial)) {}

double RenewalSolution::birth_at(double t) const {
  if (t < 0.0 || t > domain_.horizon_T * (1.0 + 1e-12))
    throw std::domain_error("birth_at: time outside [0, horizon]");
  const double pos = t / dt_;
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= B_.size()) return B_.back();
  const double frac = pos - static_cast<double>(k);
  return B_[k] * (1.0 - frac) + B_[k + 1] * frac;
}

RenewalSolution solve_renewal(const RateField& rates, const InitialDensity& initial,
                              const Domain& domain, double dt) {
  if (!(domain.horizon_T > 0.0))
    throw std::invalid_argument("solve_renewal: horizon must be positive");
  if (!(dt > 0.0) || dt > domain.horizon_T)
    throw std::invalid_argument("solve_renewal: dt must lie in (0, horizon]");
  const double T = domain.horizon_T;
  const auto K = static_cast<std::size_t>(std::max<long long>(1, std::llround(T / dt)));
  const double step = T / static_cast<double>(K);

  // Age grid for the source term M(t): covers the initial support with step
  // <= dt. Cohorts certified to never reproduce are skipped; their
  // contribution to M is identically zero.
  const double ulo = initial.support_lo(), uhi = initial.support_hi();
  const auto Ju = static_cast<std::size_t>(std::ceil((uhi - ulo) / step));
  const double du = (uhi - ulo) / static_cast<double>(Ju);
  std::size_t j_keep = Ju;
  if (rates.has_birth_age_support()) {
    while (j_keep > 0 && rates.birth_vanishes_beyond(ulo + static_cast<double>(j_keep) * du))
      --j_keep;
  }

  std::vector<double> u(j_keep + 1), g0v(j_keep + 1), S(j_keep + 1, 0.0),
      mu_prev_u(j_keep + 1);
  for (std::size_t j = 0; j <= j_keep; ++j) {
    u[j] = ulo + static_cast<double>(j) * du;
    g0v[j] = initial.density(u[j]);
    mu_prev_u[j] = rates.death(0.0, u[j]);
  }

  auto source_at = [&](double t) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= j_keep; ++j) {
      const double w = (j == 0 || j == Ju) ? 0.5 : 1.0;
      const double integrand = rates.birth(t, t + u[j]) * g0v[j] * std::exp(-S[j]);
      acc += w * integrand;
    }
    return acc * du;
  };

  std::vector<double> B(K + 1, 0.0);
  std::vector<double> C;  // integrated death rate since birth, per cohort
  std::vector<double> mu_prev_c;
  C.reserve(K);
  mu_prev_c.reserve(K);

  B[0] = source_at(0.0);
  C.push_back(0.0);
  mu_prev_c.push_back(rates.death(0.0, 0.0));

  for (std::size_t k = 1; k <= K; ++k) {
    const double tk = static_cast<double>(k) * step;

    for (std::size_t j = 0; j <= j_keep; ++j) {
      const double cur = rates.death(tk, tk + u[j]);
      S[j] += 0.5 * step * (mu_prev_u[j] + cur);
      mu_prev_u[j] = cur;
    }

    double conv = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double tj = static_cast<double>(j) * step;
      const double cur = rates.death(tk, tk - tj);
      C[j] += 0.5 * step * (mu_prev_c[j] + cur);
      mu_prev_c[j] = cur;
      const double L = rates.birth(tk, tk - tj) * std::exp(-C[j]);
      const double w = (j == 0) ? 0.5 * step : step;
      conv += w * B[j] * L;
    }

    const double diag = 1.0 - 0.5 * step * rates.birth(tk, 0.0);
    if (!(diag > 0.0))
      throw std::runtime_error(
          "solve_renewal: implicit step not solvable; reduce dt below 2 / birth(t, 0) "
          "(dt = " +
          std::to_string(step) + ")");
    B[k] = (source_at(tk) + conv) / diag;

    C.push_back(0.0);
    mu_prev_c.push_back(rates.death(tk, 0.0));
  }

  return RenewalSolution(step, std::move(B), domain, rates, initial);
}

double limit_density(const RenewalSolution& sol, double t, double a) {
  const Domain& dom = sol.domain();
  const double eps_t = 1e-12 * std::max(1.0, dom.horizon_T);
  const double eps_a = 1e-12 * std::max(1.0, dom.max_age);
  if (t < -eps_t || t > dom.horizon_T + eps_t)
    throw std::domain_error("limit_density: time outside [0, horizon]");
  if (a < -eps_a || a > dom.max_age + eps_a)
    throw std::domain_error("limit_density: age outside [0, max_age]");
  if (a == t) return 0.0;
  if (a > t) {
    const double offset = a - t;
    const double g0 = sol.initial().density(offset);
    if (g0 == 0.0) return 0.0;
    return g0 * std::exp(-survival_exponent(sol.rates(), 0.0, t, offset, sol.dt()));
  }
  const double birth_time = t - a;
  const double flux = sol.birth_at(birth_time);
  if (flux == 0.0) return 0.0;
  return flux *
         std::exp(-survival_exponent(sol.rates(), birth_time, t, -birth_time, sol.dt()));
}

double limit_death_intensity(const RenewalSolution& sol, double t, double a) {
  return sol.rates().death(t, a) * limit_density(sol, t, a);
}

}  // namespace lexis
