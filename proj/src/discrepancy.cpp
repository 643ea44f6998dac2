#include "lexis/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lexis/io.hpp"
#include "lexis/quadrature.hpp"

namespace lexis {

TestFunctionFamily default_family(const RateField& rates, const Domain& domain) {
  TestFunctionFamily family;
  const double A = domain.max_age;
  family.members.push_back({"one", [](double, double) { return 1.0; }, 1.0});
  // The rate field is captured by value so the family never dangles.
  {
    const double scale = 1.0 / std::max(1.0, rates.birth_sup());
    family.members.push_back(
        {"birth_scaled",
         [rates, scale](double t, double a) { return scale * rates.birth(t, a); },
         1.0});
  }
  {
    const double scale = 1.0 / std::max(1.0, rates.death_sup());
    family.members.push_back(
        {"death_scaled",
         [rates, scale](double t, double a) { return scale * rates.death(t, a); },
         1.0});
  }
  auto hat = [](double center, double width) {
    return [center, width](double, double a) {
      return std::max(0.0, 1.0 - std::abs(a - center) / width);
    };
  };
  family.members.push_back({"age_bump_low", hat(A / 3.0, A / 6.0), 1.0});
  family.members.push_back({"age_bump_high", hat(2.0 * A / 3.0, A / 6.0), 1.0});
  {
    const double center = A / 4.0, width = A / 8.0;
    family.members.push_back(
        {"cohort_bump",
         [center, width](double t, double a) {
           return std::max(0.0, 1.0 - std::abs(a - t - center) / width);
         },
         1.0});
  }
  return family;
}

void spot_check_bounds(const TestFunctionFamily& family, const Domain& domain,
                       std::size_t grid) {
  if (grid < 2) throw std::invalid_argument("spot_check_bounds: grid too small");
  for (const auto& f : family.members) {
    for (std::size_t i = 0; i < grid; ++i) {
      const double t = domain.horizon_T * static_cast<double>(i) /
                       static_cast<double>(grid - 1);
      for (std::size_t j = 0; j < grid; ++j) {
        const double a = domain.max_age * static_cast<double>(j) /
                         static_cast<double>(grid - 1);
        if (std::abs(f.eval(t, a)) > f.declared_sup + 1e-9)
          throw std::runtime_error("test function '" + f.label +
                                   "' exceeds its declared bound");
      }
    }
  }
}

Weight weight_from_kernel(const Kernel1D& k, double h, double center,
                          bool reflected) {
  if (!(h > 0.0)) throw std::invalid_argument("weight_from_kernel: h must be positive");
  Weight w;
  w.label = k.name + (reflected ? "_reflected" : "") + "_weight";
  // Capture the kernel by value so the weight survives temporaries.
  if (reflected) {
    w.eval = [k, h, center](double x) { return eval_scaled(k, h, center - x); };
    w.support_lo = center - h * k.support_hi();
    w.support_hi = center - h * k.support_lo();
  } else {
    w.eval = [k, h, center](double x) { return eval_scaled(k, h, x - center); };
    w.support_lo = center + h * k.support_lo();
    w.support_hi = center + h * k.support_hi();
  }
  w.norm_1 = k.norm_1;          // the 1/h scaling leaves the L1 norm alone
  w.norm_inf = k.norm_inf / h;
  return w;
}

Weight constant_weight(double value, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("constant_weight: empty support");
  Weight w;
  w.label = "boxcar";
  w.eval = [value, lo, hi](double x) {
    return (x >= lo && x <= hi) ? value : 0.0;
  };
  w.support_lo = lo;
  w.support_hi = hi;
  w.norm_1 = std::abs(value) * (hi - lo);
  w.norm_inf = std::abs(value);
  return w;
}

double weight_interp_norm(const Weight& w) {
  return std::sqrt(w.norm_1 * w.norm_inf);
}

namespace {

// Simpson over [lo, hi] with a panel budget proportional to the length,
// at least 8 panels, rounded up to an even count.
double segment_integral(const std::function<double(double)>& f, double lo,
                        double hi, double budget_fraction, std::size_t panels) {
  if (!(hi > lo)) return 0.0;
  auto n = static_cast<std::size_t>(
      std::ceil(budget_fraction * static_cast<double>(panels)));
  n = std::max<std::size_t>(n, 8);
  if (n % 2 != 0) ++n;
  return simpson(f, lo, hi, n);
}

double limit_integral(const RenewalSolution& sol, const Weight& w2,
                      const TestFunction& f, double t, std::size_t panels) {
  const double A = sol.domain().max_age;
  // w2 takes the argument t - a, so its support pins a to [t - hi, t - lo].
  const double lo = std::max(0.0, t - w2.support_hi);
  const double hi = std::min(A, t - w2.support_lo);
  if (!(hi > lo)) return 0.0;
  auto integrand = [&](double a) {
    return w2.eval(t - a) * f.eval(t, a) * limit_density(sol, t, a);
  };
  const double total = hi - lo;
  if (t > lo && t < hi) {
    // The limit density jumps across the cohort diagonal a = t; integrate
    // the two sides separately.
    return segment_integral(integrand, lo, t, (t - lo) / total, panels) +
           segment_integral(integrand, t, hi, (hi - t) / total, panels);
  }
  return segment_integral(integrand, lo, hi, 1.0, panels);
}

double empirical_average(const PopulationState& snapshot, const Weight& w2,
                         const TestFunction& f, double t) {
  double sum = 0.0;
  for (double a : snapshot.ages) {
    const double wv = w2.eval(t - a);
    if (wv != 0.0) sum += wv * f.eval(t, a);
  }
  return sum / snapshot.scale_N;
}

}  // namespace

DiscrepancyBaseline discrepancy_baseline(const RenewalSolution& sol,
                                         const Weight& w2,
                                         const TestFunctionFamily& family,
                                         double t, std::size_t panels) {
  DiscrepancyBaseline base;
  base.t = t;
  base.limit_integrals.reserve(family.members.size());
  for (const auto& f : family.members)
    base.limit_integrals.push_back(limit_integral(sol, w2, f, t, panels));
  return base;
}

double weighted_discrepancy_at(const PopulationState& snapshot,
                               const DiscrepancyBaseline& baseline,
                               const Weight& w2,
                               const TestFunctionFamily& family) {
  if (baseline.limit_integrals.size() != family.members.size())
    throw std::invalid_argument("weighted_discrepancy_at: baseline does not match family");
  if (!(snapshot.scale_N > 0.0))
    throw std::invalid_argument("weighted_discrepancy_at: scale_N must be positive");
  double worst = 0.0;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    const double emp =
        empirical_average(snapshot, w2, family.members[i], baseline.t);
    worst = std::max(worst, std::abs(emp - baseline.limit_integrals[i]));
  }
  return worst;
}

double weighted_discrepancy_at(const PopulationState& snapshot,
                               const RenewalSolution& sol, const Weight& w2,
                               const TestFunctionFamily& family, double t,
                               std::size_t panels) {
  const auto base = discrepancy_baseline(sol, w2, family, t, panels);
  return weighted_discrepancy_at(snapshot, base, w2, family);
}

double integrated_discrepancy(const Trajectory& traj,
                              const RenewalSolution& sol, const Weight& w1,
                              const Weight& w2,
                              const TestFunctionFamily& family,
                              std::size_t panels, bool* spacing_warning) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 2)
    throw std::invalid_argument("integrated_discrepancy: need at least two snapshots");
  double max_gap = 0.0;
  for (std::size_t k = 1; k < snaps.size(); ++k) {
    if (!(snaps[k - 1].time < snaps[k].time))
      throw std::invalid_argument("integrated_discrepancy: snapshot times must increase");
    max_gap = std::max(max_gap, snaps[k].time - snaps[k - 1].time);
  }
  const double w2_scale = w2.support_hi - w2.support_lo;
  bool warn = max_gap > w2_scale;
  if (spacing_warning) *spacing_warning = warn;
  if (warn)
    std::cerr << "integrated_discrepancy: snapshot spacing " << max_gap
              << " exceeds the weight support length " << w2_scale
              << "; the time quadrature may be too coarse\n";

  const std::size_t nf = family.members.size();
  // Signed brackets per snapshot and member.
  std::vector<std::vector<double>> bracket(snaps.size(), std::vector<double>(nf));
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const double t = snaps[k].time;
    for (std::size_t i = 0; i < nf; ++i) {
      const double emp = empirical_average(snaps[k], w2, family.members[i], t);
      const double lim = limit_integral(sol, w2, family.members[i], t, panels);
      bracket[k][i] = emp - lim;
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    double acc = 0.0;
    for (std::size_t k = 1; k < snaps.size(); ++k) {
      const double dt = snaps[k].time - snaps[k - 1].time;
      acc += 0.5 * dt *
             (w1.eval(snaps[k - 1].time) * bracket[k - 1][i] +
              w1.eval(snaps[k].time) * bracket[k][i]);
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

double tail_envelope(double u) {
  if (u < 0.0) throw std::invalid_argument("tail_envelope: u must be nonnegative");
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::expm1(u);
}

std::vector<TailRow> concentration_tail(const std::vector<double>& normalized_samples,
                                        const std::vector<double>& u_grid) {
  if (normalized_samples.empty())
    throw std::invalid_argument("concentration_tail: no samples");
  std::vector<TailRow> rows;
  rows.reserve(u_grid.size());
  const auto n = static_cast<double>(normalized_samples.size());
  for (double u : u_grid) {
    TailRow row;
    row.u = u;
    row.envelope = tail_envelope(u);
    std::size_t count = 0;
    for (double s : normalized_samples)
      if (s >= 1.0 + u) ++count;
    row.empirical = static_cast<double>(count) / n;
    rows.push_back(row);
  }
  return rows;
}

double fitted_rate(const std::vector<double>& samples,
                   const std::vector<double>& u_grid) {
  if (samples.empty()) throw std::invalid_argument("fitted_rate: no samples");
  std::vector<double> desc = samples;
  std::sort(desc.begin(), desc.end(), std::greater<double>());
  const std::size_t n = desc.size();
  double rate = 0.0;
  for (double u : u_grid) {
    const double env = tail_envelope(u);
    if (!(env < 1.0)) continue;  // no constraint when the bound is vacuous
    const auto cap = static_cast<std::size_t>(
        std::floor(env * static_cast<double>(n)));
    if (cap >= n) continue;
    const double order_stat = desc[cap];
    if (order_stat <= 0.0) continue;
    rate = std::max(rate, order_stat / (1.0 + u));
  }
  // The infimum is not attained at jump points; nudge just above it.
  return rate * (1.0 + 1e-12);
}

double tail_decay_rate(const std::vector<TailRow>& rows) {
  std::vector<double> u, logf;
  for (const auto& r : rows)
    if (r.u > 0.0 && r.empirical > 0.0) {
      u.push_back(r.u);
      logf.push_back(std::log(r.empirical));
    }
  if (u.size() < 2) return std::numeric_limits<double>::infinity();
  const auto n = static_cast<double>(u.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sx += u[i];
    sy += logf[i];
    sxx += u[i] * u[i];
    sxy += u[i] * logf[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return -(n * sxy - sx * sy) / denom;
}

void write_tail_table(const std::filesystem::path& path,
                      const std::vector<TailRow>& rows) {
  std::ostringstream out;
  out << "u,empirical_tail,envelope\n";
  for (const auto& r : rows)
    out << format_double(r.u) << ',' << format_double(r.empirical) << ','
        << format_double(r.envelope) << '\n';
  write_text_file(path, out.str());
}

}  // namespace lexis
