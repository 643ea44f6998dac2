#pragma once

#include <filesystem>
#include <functional>
#include <string>

namespace lexis {

// One-dimensional estimation kernel. The evaluator vanishes outside
// [support_center - support_radius, support_center + support_radius];
// norm_1 = integral of |K|, norm_inf = max |K|, both certified at
// construction. declared_order is the moment order in the convention used
// throughout this library: the largest L such that the integral of
// kappa^(l-1) K(kappa) equals 1{l=1} for every l = 1, ..., L-1.
struct Kernel1D {
  std::string name;
  std::function<double(double)> evaluator;
  double support_radius = 1.0;
  double support_center = 0.0;
  int declared_order = 0;
  double norm_1 = 0.0;
  double norm_inf = 0.0;

  double support_lo() const { return support_center - support_radius; }
  double support_hi() const { return support_center + support_radius; }
};

// Built-ins, all on [-1, 1]:
Kernel1D box_kernel();           // 1/2 on [-1,1]
Kernel1D triangular_kernel();    // (1-|x|)+
Kernel1D epanechnikov_kernel();  // (3/4)(1-x^2)+
// Degree-5 polynomial kernel (15/32)(1-x^2)(3-7x^2)(1+x/2) with vanishing
// first and second moments.
Kernel1D poly5_kernel();

Kernel1D kernel_by_name(const std::string& name);

// One-sided variant: support shifted to [0, 2 * support_radius].
Kernel1D shifted_kernel(const Kernel1D& k);

// Kernel tabulated in a text file of "x value" rows (whitespace or comma
// separated, strictly increasing x), evaluated by linear interpolation and
// zero outside the tabulated range. Norms are the exact integrals of the
// polyline; declared_order comes from the moment check below.
Kernel1D load_tabulated_kernel(const std::filesystem::path& path);

// Scaled evaluation K_h(x) = K(x/h)/h, h > 0.
double eval_scaled(const Kernel1D& k, double h, double x);

// Interpolation norm of the scaled kernel: sqrt(norm_1 * norm_inf / h).
double interp_norm(const Kernel1D& k, double h);

// Moment order of the kernel in the convention above, computed by
// quadrature with tolerance `tol`; throws if the kernel does not integrate
// to one. Capped at `max_order`.
int check_order(const Kernel1D& k, double tol = 1e-8, int max_order = 16);

// Product kernel for time-age estimation. With skew on, the age factor is
// evaluated along cohort lines: value = H_h1(ds) * K_h2(ds - du); with skew
// off it is the plain product H_h1(ds) * K_h2(du).
struct SkewedProductKernel {
  Kernel1D time_kernel;
  Kernel1D age_kernel;
  bool skew = true;
};

double eval_skewed(const SkewedProductKernel& pk, double h1, double h2, double ds,
                   double du);

}  // namespace lexis
