#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oapel/error.hpp"
#include "oapel/random.hpp"
#include "oapel/stats.hpp"
#include "oracles.hpp"

using namespace oapel;
using namespace oapel::stats;

namespace {

// n values with exactly the given mean and sample standard deviation.
std::vector<double> with_moments(std::size_t n, double mean, double sd) {
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<double>(i) - static_cast<double>(n - 1) / 2.0;
  double ss = 0.0;
  for (double v : z) ss += v * v;
  const double scale = sd / std::sqrt(ss / static_cast<double>(n - 1));
  for (auto& v : z) v = mean + v * scale;
  return z;
}

double yates_by_cells(const std::array<std::array<double, 2>, 2>& t) {
  const double n = t[0][0] + t[0][1] + t[1][0] + t[1][1];
  double chi = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double e = (t[r][0] + t[r][1]) * (t[0][c] + t[1][c]) / n;
      const double dev = std::max(0.0, std::abs(t[r][c] - e) - 0.5);
      chi += dev * dev / e;
    }
  return chi;
}

}  // namespace

TEST_CASE("identical samples give t = 0 and p = 1") {
  const std::vector<double> x = {1.0, 2.0, 4.0, 8.0};
  const auto u = t_test_unpaired(x, x);
  CHECK(u.statistic == 0.0);
  CHECK(u.p_value == 1.0);
  const auto p = t_test_paired(x, x);
  CHECK(p.statistic == 0.0);
  CHECK(p.p_value == 1.0);
  const std::vector<double> c = {3.0, 3.0, 3.0};
  CHECK(t_test_unpaired(c, c).p_value == 1.0);
}

TEST_CASE("zero variance with a nonzero difference is reported") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {0.5, 1.5, 2.5};
  CHECK_THROWS_AS(t_test_paired(x, y), NumericalError);
  CHECK_THROWS_AS(t_test_unpaired(std::vector<double>{1, 1}, std::vector<double>{2, 2}), NumericalError);
}

TEST_CASE("bad shapes") {
  CHECK_THROWS(t_test_paired(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}));
  CHECK_THROWS(t_test_unpaired(std::vector<double>{1}, std::vector<double>{1}));
  CHECK_THROWS_AS(chi_squared_2x2({{{0, 0}, {3, 4}}}), DataError);
  CHECK_THROWS_AS(chi_squared_2x2({{{1, 0}, {3, 0}}}), DataError);
}

TEST_CASE("p-values match quadrature of the densities on 50 random cases") {
  Rng rng(2718);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto nx = 2 + rng.below(30);
    const auto ny = 2 + rng.below(30);
    const double shift = rng.normal();
    std::vector<double> x(nx), y(ny);
    for (auto& v : x) v = rng.normal() + shift;
    for (auto& v : y) v = rng.normal() * (0.5 + rng.uniform());

    const auto u = t_test_unpaired(x, y);
    CHECK(u.df == static_cast<double>(nx + ny - 2));
    CHECK(u.statistic == doctest::Approx(oracle::t_statistic_unpaired(x, y)).epsilon(1e-12));
    worst = std::max(worst, std::abs(u.p_value - oracle::t_p_value(u.statistic, u.df)));

    std::vector<double> a(nx), b(nx), d(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      a[i] = rng.normal();
      b[i] = a[i] + 0.3 * shift + rng.normal() * 0.7;
      d[i] = a[i] - b[i];
    }
    const auto p = t_test_paired(a, b);
    const double md = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(nx);
    double ss = 0.0;
    for (double v : d) ss += (v - md) * (v - md);
    const double tpaired = md / std::sqrt(ss / static_cast<double>(nx - 1) / static_cast<double>(nx));
    CHECK(p.statistic == doctest::Approx(tpaired).epsilon(1e-12));
    CHECK(p.df == static_cast<double>(nx - 1));
    worst = std::max(worst, std::abs(p.p_value - oracle::t_p_value(p.statistic, p.df)));

    const std::array<std::array<double, 2>, 2> table = {{{static_cast<double>(1 + rng.below(80)), static_cast<double>(1 + rng.below(80))},
                                                         {static_cast<double>(1 + rng.below(80)), static_cast<double>(1 + rng.below(80))}}};
    const auto c = chi_squared_2x2(table);
    CHECK(c.statistic == doctest::Approx(yates_by_cells(table)).epsilon(1e-12));
    CHECK(c.df == 1.0);
    worst = std::max(worst, std::abs(c.p_value - oracle::chi2_1_p_value(c.statistic)));
  }
  INFO("max abs p-value difference " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("distribution tails against quadrature over a wide range") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const double df = 1.0 + static_cast<double>(rng.below(200));
    const double stat = rng.uniform() * 12.0 - 6.0;
    CHECK(std::abs(t_two_sided_p(stat, df) - oracle::t_p_value(stat, df)) < 1e-6);
    const double x = rng.uniform() * 30.0;
    CHECK(std::abs(chi2_1df_upper(x) - oracle::chi2_1_p_value(x)) < 1e-6);
  }
  CHECK(t_two_sided_p(0.0, 5.0) == doctest::Approx(1.0));
  CHECK(chi2_1df_upper(0.0) == doctest::Approx(1.0));
  CHECK(chi2_1df_upper(3.841458820694124) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("uncorrected chi-squared is the textbook statistic") {
  const auto c = chi_squared_2x2({{{10, 20}, {30, 40}}}, false);
  // n (ad - bc)^2 / (row and column totals)
  CHECK(c.statistic == doctest::Approx(100.0 * 200.0 * 200.0 / (30.0 * 70.0 * 40.0 * 60.0)));
}

TEST_CASE("internal cohort sex split: 43/69 vs 67/138 male gives p = 0.08") {
  const auto c = chi_squared_2x2({{{43, 26}, {67, 71}}});
  CHECK(c.p_value == doctest::Approx(0.0848).epsilon(1e-3));
  CHECK(std::round(c.p_value * 100.0) / 100.0 == 0.08);
}

TEST_CASE("birth weight comparisons from the reported group summaries") {
  // Means and SDs are rounded to 0.1 g, so only agreement at that precision is expected.
  const auto internal = t_test_unpaired(with_moments(69, 1184.1, 489.3), with_moments(138, 1340.5, 397.3));
  CHECK(internal.p_value < 0.05);
  CHECK(std::abs(internal.p_value - 0.02) < 0.01);
  const auto external = t_test_unpaired(with_moments(10, 904.5, 358.8), with_moments(59, 1160.8, 397.6));
  CHECK(std::round(external.p_value * 100.0) / 100.0 == 0.06);
}
