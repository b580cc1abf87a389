#pragma once

#include <array>
#include <span>

namespace oapel::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df = 0.0;
};

/// Two-sided Student's t-test with pooled variance. Throws NumericalError
/// when both samples are constant but differ in mean.
TestResult t_test_unpaired(std::span<const double> x, std::span<const double> y);

/// Two-sided paired t-test on x - y. All-zero differences give t = 0, p = 1;
/// constant nonzero differences throw NumericalError.
TestResult t_test_paired(std::span<const double> x, std::span<const double> y);

/// Pearson chi-squared test of independence on a 2x2 table of counts, 1 df.
/// The continuity correction is on by default. Throws DataError on a zero
/// row or column total.
TestResult chi_squared_2x2(const std::array<std::array<double, 2>, 2>& table, bool continuity_correction = true);

/// Two-sided tail of Student's t with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

/// Upper tail of chi-squared with 1 degree of freedom.
double chi2_1df_upper(double x);

}  // namespace oapel::stats
