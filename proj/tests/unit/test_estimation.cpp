#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lexis/estimation.hpp"
#include "lexis/rng.hpp"

using namespace lexis;

namespace {

// Straightforward selection oracle: recompute A by definition and scan for
// the minimizer with the documented tie rules.
std::size_t oracle_1d(const std::vector<double>& h, const std::vector<double>& e,
                      const std::vector<double>& V, std::vector<double>* A_out) {
  const std::size_t m = h.size();
  std::vector<double> A(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (h[j] <= h[i]) {
        const double d = (e[i] - e[j]) * (e[i] - e[j]) - (V[i] + V[j]);
        A[i] = std::max(A[i], std::max(d, 0.0));
      }
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (A[i] + V[i] <= A[best] + V[best]) best = i;  // ties: larger h wins
  if (A_out) *A_out = A;
  return best;
}

std::size_t oracle_2d(const std::vector<std::array<double, 2>>& h,
                      const std::vector<double>& e, const std::vector<double>& V,
                      bool order_restrict) {
  const std::size_t m = h.size();
  std::vector<double> A(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (order_restrict && !(h[j][0] <= h[i][0] && h[j][1] <= h[i][1]))
        continue;
      const double d = (e[i] - e[j]) * (e[i] - e[j]) - (V[i] + V[j]);
      A[i] = std::max(A[i], std::max(d, 0.0));
    }
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i) {
    const double ci = A[i] + V[i], cb = A[best] + V[best];
    const double pi = h[i][0] * h[i][1], pb = h[best][0] * h[best][1];
    if (ci < cb || (ci == cb && (pi > pb || (pi == pb && h[i][0] > h[best][0]))))
      best = i;
  }
  return best;
}

PopulationState snapshot_of(std::vector<double> ages, double t, double scale) {
  PopulationState s;
  s.time = t;
  s.ages = std::move(ages);
  std::sort(s.ages.begin(), s.ages.end());
  s.scale_N = scale;
  return s;
}

}  // namespace

TEST_CASE("density estimator reproduces a hand-computed sum") {
  const PopulationState snap = snapshot_of({1.0, 1.5, 3.0}, 0.0, 4.0);
  const double got = estimate_density(snap, epanechnikov_kernel(), 0.5, 1.2);
  // (1/4) [K_{0.5}(-0.2) + K_{0.5}(0.3) + 0] with K Epanechnikov.
  CHECK(got == doctest::Approx(0.555).epsilon(1e-12));
  // Far from the data the estimate vanishes.
  CHECK(estimate_density(snap, epanechnikov_kernel(), 0.5, 9.0) == 0.0);
}

TEST_CASE("death-numerator estimator reproduces a hand-computed sum") {
  const std::vector<DeathRecord> deaths{{2.0, 1.0}, {2.3, 0.5}};
  const SkewedProductKernel pk{epanechnikov_kernel(), epanechnikov_kernel(), true};
  const double got = estimate_pi(deaths, pk, 0.5, 1.0, 2.1, 0.8, 4.0);
  CHECK(got == doctest::Approx(0.4228875).epsilon(1e-12));
  SkewedProductKernel plain = pk;
  plain.skew = false;
  // Unskewed: H_{0.5}(ds) K_1(du) with du = A_i - a.
  const double h1 = 1.44 * 0.72 + 1.26 * 0.6825;  // hand sums per record
  CHECK(estimate_pi(deaths, plain, 0.5, 1.0, 2.1, 0.8, 4.0) ==
        doctest::Approx(h1 / 4.0).epsilon(1e-12));
}

TEST_CASE("variance majorants follow the interpolation-norm formula") {
  const Kernel1D k = epanechnikov_kernel();
  const double N = 4000.0, h = 0.01;
  const double expected =
      std::pow(4.0 * std::log(N) * 1.0 / std::sqrt(N) * std::sqrt(0.75 / h), 2);
  CHECK(variance_term_1d(k, h, N, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(variance_term_1d(k, h, N, 1.0) == doctest::Approx(20.6392).epsilon(1e-3));
  // c_star scales quadratically, bandwidth inversely.
  CHECK(variance_term_1d(k, h, N, 2.0) ==
        doctest::Approx(4.0 * variance_term_1d(k, h, N, 1.0)));
  CHECK(variance_term_1d(k, 2.0 * h, N, 1.0) ==
        doctest::Approx(0.5 * variance_term_1d(k, h, N, 1.0)));
  const double expected2 = std::pow(4.0 * std::log(N) * 0.5 / std::sqrt(N) *
                                        std::sqrt(0.75 / 0.1) *
                                        std::sqrt(0.75 / 0.2),
                                    2);
  CHECK(variance_term_2d(k, k, 0.1, 0.2, N, 0.5) ==
        doctest::Approx(expected2).epsilon(1e-12));
  CHECK_THROWS_AS((void)variance_term_1d(k, h, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("bandwidth grids respect the admissible bracket") {
  const BandwidthGrid g = geometric_grid(4000.0, 30);
  REQUIRE(g.values.size() == 30);
  CHECK(g.values.front() == doctest::Approx(1.0 / std::sqrt(4000.0)).epsilon(1e-15));
  CHECK(g.values.back() == doctest::Approx(1.0 / std::log(4000.0)).epsilon(1e-15));
  CHECK(std::is_sorted(g.values.begin(), g.values.end()));
  validate_grid(g);

  const BandwidthGrid u = uniform_grid(100.0);
  validate_grid(u);
  CHECK(u.values.size() <= 100);
  for (std::size_t i = 1; i < u.values.size(); ++i)
    CHECK(u.values[i] - u.values[i - 1] <= 1.0 / 100.0 + 1e-12);
  CHECK(u.values.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(u.values.back() == doctest::Approx(1.0 / std::log(100.0)).epsilon(1e-15));

  BandwidthGrid bad = g;
  std::swap(bad.values[3], bad.values[4]);
  CHECK_THROWS_AS(validate_grid(bad), std::invalid_argument);
  BandwidthGrid high = g;
  high.values.back() = 10.0;
  CHECK_THROWS_AS(validate_grid(high), std::invalid_argument);
  BandwidthGrid crowded;
  crowded.scale_N = 4.0;
  crowded.values = {0.51, 0.55, 0.6, 0.65, 0.7};  // five nodes, cap is four
  CHECK_THROWS_AS(validate_grid(crowded), std::invalid_argument);
}

TEST_CASE("univariate selection matches the brute-force oracle") {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> uh(0.05, 1.0), ue(-2.0, 2.0),
      uv(0.01, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 3 + static_cast<std::size_t>(gen() % 20);
    std::vector<double> h(m), e(m), V(m);
    for (auto& x : h) x = uh(gen);
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    e.resize(h.size());
    V.resize(h.size());
    for (auto& x : e) x = ue(gen);
    for (auto& x : V) x = uv(gen);
    std::vector<double> A_lib, A_ref;
    const std::size_t got = gl_select_from_tables_1d(h, e, V, &A_lib);
    const std::size_t want = oracle_1d(h, e, V, &A_ref);
    REQUIRE(got == want);
    REQUIRE(A_lib.size() == A_ref.size());
    for (std::size_t i = 0; i < A_lib.size(); ++i)
      CHECK(A_lib[i] == doctest::Approx(A_ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("selection ties resolve toward the largest bandwidth") {
  const std::vector<double> h{0.1, 0.2, 0.4};
  const std::vector<double> e{1.0, 1.0, 1.0};
  const std::vector<double> V{0.5, 0.5, 0.5};
  CHECK(gl_select_from_tables_1d(h, e, V) == 2);
  const std::vector<std::array<double, 2>> h2{
      {0.1, 0.1}, {0.1, 0.2}, {0.2, 0.1}, {0.2, 0.2}};
  const std::vector<double> e2(4, 1.0), V2(4, 0.5);
  // All criteria equal: largest product (0.04), i.e. the last pair.
  CHECK(gl_select_from_tables_2d(h2, e2, V2, true) == 3);
  CHECK(gl_select_from_tables_2d(h2, e2, V2, false) == 3);
}

TEST_CASE("bivariate selection matches the brute-force oracle") {
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> uh(0.05, 1.0), ue(-2.0, 2.0),
      uv(0.01, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m1 = 2 + gen() % 5, m2 = 2 + gen() % 5;
    std::vector<double> h1(m1), h2v(m2);
    for (auto& x : h1) x = uh(gen);
    for (auto& x : h2v) x = uh(gen);
    std::sort(h1.begin(), h1.end());
    std::sort(h2v.begin(), h2v.end());
    std::vector<std::array<double, 2>> pairs;
    for (double a : h1)
      for (double b : h2v) pairs.push_back({a, b});
    std::vector<double> e(pairs.size()), V(pairs.size());
    for (auto& x : e) x = ue(gen);
    for (auto& x : V) x = uv(gen);
    const bool restrict_set = trial % 2 == 0;
    CHECK(gl_select_from_tables_2d(pairs, e, V, restrict_set) ==
          oracle_2d(pairs, e, V, restrict_set));
  }
}

TEST_CASE("data-driven density selection recovers a flat profile") {
  Rng rng(5);
  std::vector<double> ages(5000);
  for (auto& a : ages) a = rng.uniform(0.0, 10.0);
  const PopulationState snap = snapshot_of(std::move(ages), 3.0, 5000.0);
  const BandwidthGrid grid = geometric_grid(5000.0, 25);
  GLConfig cfg;
  cfg.c_star = 0.1;
  const EstimateReport rep =
      gl_select_density(snap, grid, epanechnikov_kernel(), cfg, 3.0, 5.0);
  REQUIRE(rep.rows.size() == grid.values.size());
  CHECK(rep.value == doctest::Approx(0.1).epsilon(0.15));
  CHECK(rep.selected_bandwidths.size() == 1);
  CHECK(rep.selected_bandwidths[0] == rep.rows[rep.selected_index].h[0]);
  CHECK(rep.value == rep.rows[rep.selected_index].estimate);
  // Inconsistent snapshot time or scale is rejected.
  CHECK_THROWS_AS(
      (void)gl_select_density(snap, grid, epanechnikov_kernel(), cfg, 4.0, 5.0),
      std::invalid_argument);
  BandwidthGrid other = geometric_grid(400.0, 25);
  CHECK_THROWS_AS(
      (void)gl_select_density(snap, other, epanechnikov_kernel(), cfg, 3.0, 5.0),
      std::invalid_argument);
}

TEST_CASE("data-driven numerator selection is table-consistent") {
  Rng rng(9);
  std::vector<DeathRecord> deaths;
  for (int i = 0; i < 800; ++i)
    deaths.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.0, 20.0)});
  const double N = 900.0;
  const BandwidthGrid g = geometric_grid(N, 8);
  const BandwidthGrid2 g2{g, g};
  const SkewedProductKernel pk{epanechnikov_kernel(), epanechnikov_kernel(), true};
  GLConfig cfg;
  const EstimateReport rep = gl_select_pi(deaths, g2, pk, cfg, 5.0, 10.0, N);
  REQUIRE(rep.rows.size() == g.values.size() * g.values.size());
  // Product lattice enumerated h1-major, both ascending.
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].h[0] == g.values[i / g.values.size()]);
    CHECK(rep.rows[i].h[1] == g.values[i % g.values.size()]);
  }
  const auto& chosen = rep.rows[rep.selected_index];
  CHECK(rep.value == chosen.estimate);
  CHECK(rep.value == doctest::Approx(estimate_pi(deaths, pk, chosen.h[0],
                                                 chosen.h[1], 5.0, 10.0, N)));
  CHECK(rep.selected_bandwidths == std::vector<double>{chosen.h[0], chosen.h[1]});
}

TEST_CASE("quotient estimator applies the density floor") {
  EstimateReport g, pi;
  g.value = 0.001;
  pi.value = 0.05;
  CHECK(estimate_mu(g, pi, 0.01) == doctest::Approx(5.0));
  g.value = 0.5;
  CHECK(estimate_mu(g, pi, 0.01) == doctest::Approx(0.1));
  CHECK_THROWS_AS((void)estimate_mu(g, pi, 0.0), std::invalid_argument);
}

TEST_CASE("oracle bandwidth picks the closest estimate, largest h on ties") {
  const std::map<double, double> table{{0.1, 5.0}, {0.2, 4.0}, {0.3, 10.0}};
  CHECK(oracle_bandwidth(4.5, table) == 0.2);  // tie between 0.1 and 0.2
  CHECK(oracle_bandwidth(9.0, table) == 0.3);
  CHECK(oracle_bandwidth(4.1, table) == 0.2);
  CHECK_THROWS_AS((void)oracle_bandwidth(1.0, {}), std::invalid_argument);
}

TEST_CASE("c_star calibration walks off grid edges") {
  auto callback = [](double c) -> std::size_t {
    if (c > 10.0) return 4;  // majorant too big: widest bandwidth wins
    if (c < 0.1) return 0;   // too small: narrowest wins
    return 2;
  };
  CHECK(calibrate_cstar(callback, 5, 1.0, 2.0, 60) == doctest::Approx(1.0));
  CHECK(calibrate_cstar(callback, 5, 0.02, 2.0, 60) == doctest::Approx(0.16));
  CHECK(calibrate_cstar(callback, 5, 40.0, 2.0, 60) == doctest::Approx(10.0));
  // Degenerate grids are returned untouched.
  CHECK(calibrate_cstar(callback, 2, 0.02, 2.0, 60) == doctest::Approx(0.02));
  CHECK_THROWS_AS((void)calibrate_cstar(callback, 5, -1.0, 2.0, 60),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)calibrate_cstar(callback, 5, 1.0, 0.5, 60),
                  std::invalid_argument);
}
