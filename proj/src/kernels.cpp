#include "lexis/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lexis/quadrature.hpp"

namespace lexis {

Kernel1D box_kernel() {
  Kernel1D k;
  k.name = "box";
  k.evaluator = [](double x) { return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0; };
  k.declared_order = 3;
  k.norm_1 = 1.0;
  k.norm_inf = 0.5;
  return k;
}

Kernel1D triangular_kernel() {
  Kernel1D k;
  k.name = "triangular";
  k.evaluator = [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
  k.declared_order = 3;
  k.norm_1 = 1.0;
  k.norm_inf = 1.0;
  return k;
}

Kernel1D epanechnikov_kernel() {
  Kernel1D k;
  k.name = "epanechnikov";
  k.evaluator = [](double x) {
    return (x >= -1.0 && x <= 1.0) ? 0.75 * (1.0 - x * x) : 0.0;
  };
  k.declared_order = 3;
  k.norm_1 = 1.0;
  k.norm_inf = 0.75;
  return k;
}

Kernel1D poly5_kernel() {
  Kernel1D k;
  k.name = "poly5";
  k.evaluator = [](double x) {
    if (x < -1.0 || x > 1.0) return 0.0;
    return 15.0 / 32.0 * (1.0 - x * x) * (3.0 - 7.0 * x * x) * (1.0 + 0.5 * x);
  };
  // Moments 1 and 2 vanish, the third does not.
  k.declared_order = 4;
  k.norm_1 = 1.2445268709987788;
  k.norm_inf = 1.4317920595264173;
  return k;
}

Kernel1D kernel_by_name(const std::string& name) {
  if (name == "box") return box_kernel();
  if (name == "triangular") return triangular_kernel();
  if (name == "epanechnikov") return epanechnikov_kernel();
  if (name == "poly5") return poly5_kernel();
  throw std::invalid_argument("unknown kernel name: " + name);
}

Kernel1D shifted_kernel(const Kernel1D& k) {
  Kernel1D s = k;
  s.name = k.name + "_shifted";
  const double shift = k.support_radius - k.support_center;
  s.evaluator = [base = k.evaluator, shift](double x) { return base(x - shift); };
  s.support_center = k.support_center + shift;
  // Shifting moves mass off the origin: only the zeroth moment survives.
  s.declared_order = 2;
  return s;
}

Kernel1D load_tabulated_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table: " + path.string());
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    double x, v;
    if (ss >> x >> v) {
      if (!xs.empty() && x <= xs.back())
        throw std::invalid_argument("kernel table abscissae must be strictly increasing");
      xs.push_back(x);
      vs.push_back(v);
    }
  }
  if (xs.size() < 2) throw std::invalid_argument("kernel table needs at least two rows");

  auto shared_xs = std::make_shared<std::vector<double>>(std::move(xs));
  auto shared_vs = std::make_shared<std::vector<double>>(std::move(vs));
  const auto& X = *shared_xs;
  const auto& V = *shared_vs;

  Kernel1D k;
  k.name = "tabulated:" + path.filename().string();
  k.evaluator = [shared_xs, shared_vs](double x) {
    const auto& xs = *shared_xs;
    const auto& vs = *shared_vs;
    if (x < xs.front() || x > xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return vs.front();
    if (it == xs.end()) return vs.back();
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return vs[i - 1] * (1.0 - t) + vs[i] * t;
  };
  k.support_center = 0.5 * (X.front() + X.back());
  k.support_radius = 0.5 * (X.back() - X.front());

  // Exact polyline integrals. For norm_1 each segment is split at a sign
  // change of the linear piece.
  double total = 0.0, abs_total = 0.0, vmax = 0.0;
  for (std::size_t i = 1; i < X.size(); ++i) {
    const double w = X[i] - X[i - 1], a = V[i - 1], b = V[i];
    total += 0.5 * (a + b) * w;
    if (a * b >= 0.0) {
      abs_total += 0.5 * (std::abs(a) + std::abs(b)) * w;
    } else {
      const double c = a / (a - b);  // zero crossing fraction
      abs_total += 0.5 * std::abs(a) * c * w + 0.5 * std::abs(b) * (1.0 - c) * w;
    }
    vmax = std::max({vmax, std::abs(a), std::abs(b)});
  }
  if (std::abs(total - 1.0) > 1e-3)
    throw std::invalid_argument("tabulated kernel must integrate to one (within 1e-3)");
  k.norm_1 = abs_total;
  k.norm_inf = vmax;
  k.declared_order = check_order(k, 1e-3);
  return k;
}

double eval_scaled(const Kernel1D& k, double h, double x) {
  if (!(h > 0.0)) throw std::invalid_argument("eval_scaled: bandwidth must be positive");
  return k.evaluator(x / h) / h;
}

double interp_norm(const Kernel1D& k, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("interp_norm: bandwidth must be positive");
  return std::sqrt(k.norm_1 * k.norm_inf / h);
}

int check_order(const Kernel1D& k, double tol, int max_order) {
  const double lo = k.support_lo(), hi = k.support_hi();
  auto moment = [&](int ell) {
    return simpson([&](double x) { return std::pow(x, ell - 1) * k.evaluator(x); }, lo, hi,
                   4096);
  };
  if (std::abs(moment(1) - 1.0) > tol)
    throw std::invalid_argument("check_order: kernel does not integrate to one");
  int order = 2;
  while (order < max_order && std::abs(moment(order)) <= tol) ++order;
  return order;
}

double eval_skewed(const SkewedProductKernel& pk, double h1, double h2, double ds,
                   double du) {
  const double time_part = eval_scaled(pk.time_kernel, h1, ds);
  if (time_part == 0.0) return 0.0;
  const double arg = pk.skew ? (ds - du) : du;
  return time_part * eval_scaled(pk.age_kernel, h2, arg);
}

}  // namespace lexis
