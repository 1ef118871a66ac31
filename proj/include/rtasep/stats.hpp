#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rtasep::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion (95% by default).
Interval wilson_interval(std::int64_t hits, std::int64_t n, double z = 1.959963984540054);

double mean(std::span<const double> x);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> x);
double median(std::span<const double> x);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t dof = 0;  // chi-square only
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_tail(double lambda);

/// One-sample KS against a continuous cdf, Stephens' small-sample correction.
TestResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Pearson goodness of fit. `probs` must sum to one over the bins; dof is
/// bins - 1 - fitted_params.
TestResult chi_square_gof(std::span<const std::int64_t> observed, std::span<const double> probs,
                          int fitted_params = 0);

/// Half-width of the DKW band at level alpha.
double dkw_epsilon(std::int64_t n, double alpha);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Least squares of y on x.
LineFit linear_fit(std::span<const double> x, std::span<const double> y);
/// Least squares of log y on log x; all values must be positive.
LineFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace rtasep::stats
