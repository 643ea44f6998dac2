#pragma once

#include <stdexcept>
#include <utility>

namespace lexis {

// Composite trapezoid rule on [lo, hi] with n panels (n >= 1).
template <class F>
double trapezoid(F&& f, double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("trapezoid: need at least one panel");
  if (lo == hi) return 0.0;
  const double h = (hi - lo) / n;
  double acc = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) acc += f(lo + i * h);
  return acc * h;
}

// Composite Simpson rule on [lo, hi] with n panels (n >= 2, even).
template <class F>
double simpson(F&& f, double lo, double hi, int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("simpson: panel count must be even and >= 2");
  if (lo == hi) return 0.0;
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace lexis
