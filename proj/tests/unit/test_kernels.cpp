#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "lexis/kernels.hpp"

using namespace lexis;

namespace {

double quad_integral(const Kernel1D& k, int moment) {
  // Composite Simpson over the support, fine enough for polynomial kernels.
  const double lo = k.support_lo(), hi = k.support_hi();
  const int n = 4096;
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::pow(x, moment) * k.evaluator(x);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("built-in kernels carry exact norms and unit mass") {
  for (const char* name : {"box", "triangular", "epanechnikov", "poly5"}) {
    const Kernel1D k = kernel_by_name(name);
    CHECK(quad_integral(k, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(k.evaluator(k.support_lo() - 0.01) == 0.0);
    CHECK(k.evaluator(k.support_hi() + 0.01) == 0.0);
  }
  CHECK(box_kernel().norm_1 == doctest::Approx(1.0));
  CHECK(box_kernel().norm_inf == doctest::Approx(0.5));
  CHECK(triangular_kernel().norm_inf == doctest::Approx(1.0));
  CHECK(epanechnikov_kernel().norm_inf == doctest::Approx(0.75));
  CHECK(epanechnikov_kernel().evaluator(0.5) == doctest::Approx(0.75 * 0.75));
}

TEST_CASE("declared orders are confirmed by the moment check") {
  CHECK(check_order(box_kernel()) == box_kernel().declared_order);
  CHECK(check_order(triangular_kernel()) == triangular_kernel().declared_order);
  CHECK(check_order(epanechnikov_kernel()) == epanechnikov_kernel().declared_order);
  CHECK(check_order(poly5_kernel()) == poly5_kernel().declared_order);
  // The degree-5 kernel kills the first two moments.
  const Kernel1D p5 = poly5_kernel();
  CHECK(std::abs(quad_integral(p5, 1)) < 1e-8);
  CHECK(std::abs(quad_integral(p5, 2)) < 1e-8);
  CHECK(p5.declared_order >= 3);
}

TEST_CASE("unknown kernel names are rejected") {
  CHECK_THROWS_AS((void)kernel_by_name("gauss"), std::invalid_argument);
}

TEST_CASE("scaled evaluation and interpolation norm") {
  const Kernel1D k = epanechnikov_kernel();
  const double h = 0.2;
  CHECK(eval_scaled(k, h, 0.1) == doctest::Approx(k.evaluator(0.5) / h));
  CHECK(eval_scaled(k, h, 0.3) == 0.0);
  CHECK(interp_norm(k, h) ==
        doctest::Approx(std::sqrt(k.norm_1 * k.norm_inf / h)));
  CHECK_THROWS_AS((void)eval_scaled(k, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("shifted kernel moves the support to the nonnegative axis") {
  const Kernel1D s = shifted_kernel(epanechnikov_kernel());
  CHECK(s.support_lo() == doctest::Approx(0.0));
  CHECK(s.support_hi() == doctest::Approx(2.0));
  CHECK(s.evaluator(-0.01) == 0.0);
  CHECK(s.evaluator(1.0) == doctest::Approx(0.75));  // old origin
  CHECK(quad_integral(s, 0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("tabulated kernel loads, interpolates, and integrates") {
  const auto path = std::filesystem::temp_directory_path() / "lexis_tri_tab.txt";
  {
    std::ofstream out(path);
    out << "-1 0\n0 1\n1 0\n";
  }
  const Kernel1D k = load_tabulated_kernel(path);
  CHECK(k.evaluator(0.0) == doctest::Approx(1.0));
  CHECK(k.evaluator(0.5) == doctest::Approx(0.5));
  CHECK(k.evaluator(2.0) == 0.0);
  CHECK(k.norm_1 == doctest::Approx(1.0));
  CHECK(k.norm_inf == doctest::Approx(1.0));
  CHECK(check_order(k) == k.declared_order);
  std::filesystem::remove(path);
}

TEST_CASE("skewed product kernel evaluates along cohort lines") {
  const SkewedProductKernel pk{epanechnikov_kernel(), epanechnikov_kernel(), true};
  const double h1 = 0.5, h2 = 1.0, ds = -0.1, du = 0.2;
  const double expected = eval_scaled(pk.time_kernel, h1, ds) *
                          eval_scaled(pk.age_kernel, h2, ds - du);
  CHECK(eval_skewed(pk, h1, h2, ds, du) == doctest::Approx(expected));
  SkewedProductKernel plain = pk;
  plain.skew = false;
  CHECK(eval_skewed(plain, h1, h2, ds, du) ==
        doctest::Approx(eval_scaled(pk.time_kernel, h1, ds) *
                        eval_scaled(pk.age_kernel, h2, du)));
}
