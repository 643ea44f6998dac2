#include "lexis/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lexis/quadrature.hpp"

namespace lexis {

RateField::RateField(Fn birth, double birth_sup, Fn death, double death_sup,
                     double max_age)
    : birth_(std::move(birth)),
      death_(std::move(death)),
      birth_sup_(birth_sup),
      death_sup_(death_sup),
      max_age_(max_age) {
  if (!birth_ || !death_) throw std::invalid_argument("RateField: null evaluator");
  if (birth_sup_ < 0.0 || death_sup_ < 0.0)
    throw std::invalid_argument("RateField: negative certified bound");
  if (max_age_ <= 0.0) throw std::invalid_argument("RateField: max_age must be positive");
}

void RateField::declare_birth_age_support(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("RateField: empty birth age window");
  has_birth_window_ = true;
  birth_window_lo_ = lo;
  birth_window_hi_ = hi;
}

InitialDensity::InitialDensity(std::function<double(double)> density, double total_mass,
                               double sup_norm, double support_lo, double support_hi,
                               int table_panels)
    : density_(std::move(density)),
      total_mass_(total_mass),
      sup_norm_(sup_norm),
      support_lo_(support_lo),
      support_hi_(support_hi) {
  if (!density_) throw std::invalid_argument("InitialDensity: null density");
  if (!(support_lo_ < support_hi_))
    throw std::invalid_argument("InitialDensity: support must be a nonempty interval");
  if (!(total_mass_ > 0.0)) throw std::invalid_argument("InitialDensity: mass must be positive");
  if (!(sup_norm_ > 0.0)) throw std::invalid_argument("InitialDensity: sup norm must be positive");
  if (table_panels < 16) throw std::invalid_argument("InitialDensity: table too coarse");

  step_ = (support_hi_ - support_lo_) / table_panels;
  cdf_.resize(table_panels + 1);
  cdf_[0] = 0.0;
  for (int i = 0; i < table_panels; ++i) {
    const double a0 = support_lo_ + i * step_;
    const double piece = simpson(density_, a0, a0 + step_, 8);
    cdf_[i + 1] = cdf_[i] + piece;
  }
  const double mass = cdf_.back();
  if (std::abs(mass - total_mass_) > 1e-6 * total_mass_)
    throw std::invalid_argument(
        "InitialDensity: quadrature mass disagrees with the declared total mass");
  for (auto& c : cdf_) c /= mass;
  cdf_.back() = 1.0;
}

double InitialDensity::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("InitialDensity::quantile: u outside [0,1]");
  // First index with cdf >= u, then linear interpolation inside the panel.
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return support_lo_;
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[i - 1], c1 = cdf_[i];
  const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return support_lo_ + (static_cast<double>(i - 1) + frac) * step_;
}

InitialDensity truncated_gaussian_density(double mean, double variance, double lo,
                                          double hi) {
  if (!(variance > 0.0))
    throw std::invalid_argument("truncated_gaussian_density: variance must be positive");
  if (!(lo < hi))
    throw std::invalid_argument("truncated_gaussian_density: need lo < hi");
  const double sigma = std::sqrt(variance);
  auto std_cdf = [](double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); };
  const double z = std_cdf((hi - mean) / sigma) - std_cdf((lo - mean) / sigma);
  if (!(z > 0.0))
    throw std::invalid_argument(
        "truncated_gaussian_density: interval carries no Gaussian mass");
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI) * z);
  auto dens = [mean, sigma, norm](double a) {
    const double s = (a - mean) / sigma;
    return norm * std::exp(-0.5 * s * s);
  };
  const double mode = std::clamp(mean, lo, hi);
  return InitialDensity(dens, 1.0, dens(mode), lo, hi);
}

Demography builtin_demography(double window_lo, double window_hi, double birth_amplitude) {
  if (!(window_lo <= window_hi))
    throw std::invalid_argument("builtin_demography: empty fertility window");
  if (!(birth_amplitude >= 0.0))
    throw std::invalid_argument("builtin_demography: negative birth amplitude");
  Domain dom{20.0, 120.0};
  auto death = [](double t, double a) {
    return 0.04 * std::exp(0.0074 * a) * std::exp(-0.005 * t);
  };
  auto birth = [window_lo, window_hi, birth_amplitude](double, double a) {
    return (a >= window_lo && a <= window_hi) ? birth_amplitude : 0.0;
  };
  const double death_sup = 0.04 * std::exp(0.0074 * dom.max_age);
  RateField rates(birth, birth_amplitude, death, death_sup, dom.max_age);
  rates.declare_birth_age_support(window_lo, window_hi);
  return Demography{dom, std::move(rates), truncated_gaussian_density(40.0, 152.0, 0.0, 120.0)};
}

}  // namespace lexis
