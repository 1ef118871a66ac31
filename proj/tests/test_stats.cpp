#include <doctest.h>

#include <cmath>
#include <vector>

#include "rtasep/stats.hpp"

using namespace rtasep;

TEST_CASE("wilson interval matches the textbook value") {
  // 40 of 100 at 95%: (0.3094, 0.4980)
  const auto ci = stats::wilson_interval(40, 100);
  CHECK(ci.lo == doctest::Approx(0.30938).epsilon(1e-4));
  CHECK(ci.hi == doctest::Approx(0.49804).epsilon(1e-4));
  const auto zero = stats::wilson_interval(0, 50);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("mean, unbiased variance and median") {
  const std::vector<double> x{1, 2, 3, 4, 10};
  CHECK(stats::mean(x) == 4.0);
  CHECK(stats::variance(x) == doctest::Approx(12.5));
  CHECK(stats::median(x) == 3.0);
  const std::vector<double> even{4, 1, 3, 2};
  CHECK(stats::median(even) == 2.5);
}

TEST_CASE("kolmogorov tail at classical critical points") {
  CHECK(stats::kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(stats::kolmogorov_tail(0.0) == 1.0);
}

TEST_CASE("ks one-sample: statistic on a hand example") {
  // Sample {0.1, 0.5, 0.9} vs U(0,1): D = max(1/3-0.1, 0.5-1/3, 0.9-2/3, 1-0.9, ...) = 0.2333
  const std::vector<double> x{0.9, 0.1, 0.5};
  const auto r = stats::ks_one_sample(x, [](double v) { return v; });
  CHECK(r.statistic == doctest::Approx(0.23333).epsilon(1e-4));
  CHECK(r.p_value > 0.5);
}

TEST_CASE("ks two-sample separates shifted samples") {
  std::vector<double> a, b;
  for (int i = 0; i < 500; ++i) {
    a.push_back((i + 0.5) / 500.0);
    b.push_back((i + 0.5) / 500.0 + 0.2);
  }
  CHECK(stats::ks_two_sample(a, a).p_value > 0.99);
  CHECK(stats::ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("chi-square goodness of fit") {
  const std::vector<std::int64_t> obs{50, 30, 20};
  const std::vector<double> p{0.5, 0.3, 0.2};
  const auto exact = stats::chi_square_gof(obs, p);
  CHECK(exact.statistic == doctest::Approx(0.0));
  CHECK(exact.dof == 2);
  CHECK(exact.p_value == doctest::Approx(1.0));
  // (60-50)^2/50 + (20-30)^2/30 + 0 = 5.333, dof 2: p = exp(-5.333/2)
  const std::vector<std::int64_t> off{60, 20, 20};
  const auto r = stats::chi_square_gof(off, p);
  CHECK(r.statistic == doctest::Approx(16.0 / 3.0));
  CHECK(r.p_value == doctest::Approx(std::exp(-8.0 / 3.0)).epsilon(1e-9));
  CHECK(stats::chi_square_gof(off, p, 1).dof == 1);
}

TEST_CASE("dkw band") { CHECK(stats::dkw_epsilon(1000, 0.05) == doctest::Approx(std::sqrt(std::log(40.0) / 2000.0))); }

TEST_CASE("least squares recovers exact lines and power laws") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<double> t{1e3, 1e4, 1e5};
  std::vector<double> m;
  for (double v : t) m.push_back(0.7 * std::pow(v, 2.0 / 3.0));
  CHECK(stats::loglog_fit(t, m).slope == doctest::Approx(2.0 / 3.0));
  const std::vector<double> bad{1.0, 0.0, 2.0};
  CHECK_THROWS(stats::loglog_fit(t, bad));
}
