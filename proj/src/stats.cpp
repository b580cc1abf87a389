#include "oapel/stats.hpp"

#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "oapel/error.hpp"

namespace oapel::stats {

namespace {

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sum_sq_dev(std::span<const double> v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

void check_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) throw DataError("t-test: non-finite value");
}

}  // namespace

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw NumericalError("t distribution needs df > 0");
  if (t == 0.0) return 1.0;
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

double chi2_1df_upper(double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5, x / 2.0);
}

TestResult t_test_unpaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw DataError("t-test: each sample needs at least 2 values");
  check_finite(x);
  check_finite(y);
  const double mx = mean(x), my = mean(y);
  const double df = static_cast<double>(x.size() + y.size() - 2);
  const double pooled = (sum_sq_dev(x, mx) + sum_sq_dev(y, my)) / df;
  const double se = std::sqrt(pooled * (1.0 / static_cast<double>(x.size()) + 1.0 / static_cast<double>(y.size())));
  if (se == 0.0) {
    if (mx == my) return {0.0, 1.0, df};
    throw NumericalError("t-test: zero variance in both samples");
  }
  const double t = (mx - my) / se;
  return {t, t_two_sided_p(t, df), df};
}

TestResult t_test_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("paired t-test: samples differ in length");
  if (x.size() < 2) throw DataError("paired t-test: need at least 2 pairs");
  check_finite(x);
  check_finite(y);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  const double md = mean(d);
  const double df = static_cast<double>(d.size() - 1);
  const double se = std::sqrt(sum_sq_dev(d, md) / df / static_cast<double>(d.size()));
  if (se == 0.0) {
    if (md == 0.0) return {0.0, 1.0, df};
    throw NumericalError("paired t-test: differences have zero variance");
  }
  const double t = md / se;
  return {t, t_two_sided_p(t, df), df};
}

TestResult chi_squared_2x2(const std::array<std::array<double, 2>, 2>& t, bool continuity_correction) {
  for (const auto& row : t)
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("chi-squared: table entries must be finite and >= 0");
  const double r0 = t[0][0] + t[0][1], r1 = t[1][0] + t[1][1];
  const double c0 = t[0][0] + t[1][0], c1 = t[0][1] + t[1][1];
  const double n = r0 + r1;
  if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) throw DataError("chi-squared: zero marginal total");
  // |O - E| is the same in every cell of a 2x2 table.
  double dev = std::abs(t[0][0] * t[1][1] - t[0][1] * t[1][0]) / n;
  if (continuity_correction) dev = std::max(0.0, dev - 0.5);
  const double stat = n * n * dev * dev / (r0 * r1 * c0 * c1) * n;
  return {stat, chi2_1df_upper(stat), 1.0};
}

}  // namespace oapel::stats
