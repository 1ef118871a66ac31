#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rtasep/disorder.hpp"
#include "rtasep/stats.hpp"

using namespace rtasep;

namespace {

const RateLaw kRef{0.5, 1.0, 4.0, 0.5};

}  // namespace

TEST_CASE("rate law: cdf endpoints and atom") {
  const RateLaw law{0.5, 1.0, 1.0, 0.5};
  CHECK(law.cdf(0.5) == 0.0);
  CHECK(law.cdf(0.4) == 0.0);
  CHECK(law.cdf(1.0) == 1.0);
  // kappa q^(nu+1) on the window
  CHECK(law.cdf(0.6) == doctest::Approx(0.01));
  CHECK(law.cdf(1.0 - 1e-12) == doctest::Approx(0.25));
  CHECK(law.top_mass() == doctest::Approx(0.75));
}

TEST_CASE("rate law: rejects masses above one and bad parameters") {
  CHECK_THROWS_AS(RateLaw(0.5, 1.0, 5.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RateLaw(0.5, -1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RateLaw(0.0, 1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RateLaw(0.5, 1.0, 1.0, 0.6), std::invalid_argument);
  CHECK_NOTHROW(RateLaw(0.5, -0.5, std::sqrt(2.0), 0.5));
}

TEST_CASE("rate law: quantile inverts cdf") {
  for (const RateLaw& law : {kRef, RateLaw(0.5, 1.0, 1.0, 0.5), RateLaw(0.3, -0.5, 1.0, 0.5)}) {
    for (double u : {1e-4, 0.01, 0.2, 0.5, law.window_mass() * 0.999}) {
      if (u >= law.window_mass()) continue;
      const double p = law.quantile(u);
      CHECK(p > law.c());
      CHECK(law.cdf(p) == doctest::Approx(u).epsilon(1e-6));
    }
    if (law.top_mass() > 0.0) CHECK(law.quantile(0.9999999) == 1.0);
  }
}

TEST_CASE("rate law: constants of the reference law") {
  const DerivedConstants k = kRef.constants();
  CHECK(k.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(k.one_minus_alpha == doctest::Approx(2.0 / 3.0));
  CHECK(k.a_nu == doctest::Approx(6.75));
  REQUIRE(k.u_star.is_finite());
  CHECK(k.u_star.value() == doctest::Approx(2.0));
  CHECK(k.rho_star == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("critical gap: closed form agrees with quadrature and hand integrals") {
  // Hand integral: int_0^eps c/q * kappa (nu+1) q^nu dq + top_mass c/(1-c).
  const RateLaw law{0.5, 1.0, 1.0, 0.5};
  const double hand = 0.5 * 2.0 * 0.5 + 0.75 * 0.5 / 0.5;
  CHECK(critical_gap(law).value() == doctest::Approx(hand));
  CHECK(critical_gap_quadrature(law) == doctest::Approx(hand).epsilon(1e-8));
  const RateLaw l2{0.3, 2.0, 3.0, 0.5};
  CHECK(critical_gap(l2).value() == doctest::Approx(critical_gap_quadrature(l2)).epsilon(1e-8));
  CHECK(critical_gap(RateLaw(0.5, 0.0, 2.0, 0.5)).is_infinite());
  CHECK(critical_gap(RateLaw(0.5, -0.5, std::sqrt(2.0), 0.5)).is_infinite());
  CHECK_THROWS(critical_gap_quadrature(RateLaw(0.5, 0.0, 2.0, 0.5)));
}

TEST_CASE("velocity and gap are inverse, u(c) = u*") {
  CHECK(velocity_to_gap(kRef, 0.0) == 0.0);
  CHECK(velocity_to_gap(kRef, 0.5) == doctest::Approx(2.0));
  for (double a : {0.05, 0.2, 0.45, 0.499}) {
    CHECK(gap_to_velocity(kRef, velocity_to_gap(kRef, a)) == doctest::Approx(a).epsilon(1e-9));
  }
  // increasing in a
  CHECK(velocity_to_gap(kRef, 0.3) < velocity_to_gap(kRef, 0.4));
  CHECK_THROWS_AS(gap_to_velocity(kRef, 2.0), std::domain_error);
  CHECK_THROWS_AS(gap_to_velocity(RateLaw(0.5, 0.0, 2.0, 0.5), 1.0), std::domain_error);
}

TEST_CASE("window integral of 1 is the window mass") {
  CHECK(window_integral(kRef, [](double) { return 1.0; }) == doctest::Approx(1.0));
  const RateLaw law{0.5, 1.0, 1.0, 0.5};
  // int_{0.1}^{0.5} 2q dq = 0.24
  CHECK(window_integral(law, [](double) { return 1.0; }, 0.1) == doctest::Approx(0.24));
}

TEST_CASE("disorder field: pure in (seed, label) and follows the law") {
  const DisorderField a = sample_rates(kRef, {-5, 5}, 11);
  const DisorderField b = sample_rates(kRef, {0, 10}, 11);
  for (Label i = 0; i <= 5; ++i) CHECK(a.rate(i) == b.rate(i));
  CHECK(a.rate(3) == draw_rate(kRef, 11, 3));
  CHECK_THROWS(a.rate(6));

  const DisorderField big = sample_rates(kRef, {0, 19999}, 5);
  for (double p : big.rates()) REQUIRE((p > 0.5 && p <= 1.0));
  const auto ks = stats::ks_one_sample(big.rates(), [](double p) { return kRef.cdf(p); });
  CHECK(ks.p_value > 1e-3);
}

TEST_CASE("disorder field: explicit rates are validated, csv has two columns") {
  CHECK_THROWS(DisorderField::from_rates(kRef, 0, {0.7, 0.4}));
  const DisorderField f = DisorderField::from_rates(kRef, 2, {0.7, 1.0});
  CHECK(f.min_rate() == 0.7);
  std::ostringstream os;
  f.write_csv(os);
  CHECK(os.str().rfind("index,rate\n2,", 0) == 0);
}

TEST_CASE("slow scan finds the first slow rate in either direction") {
  const DisorderField f = DisorderField::from_rates(kRef, -3, {0.55, 0.9, 0.9, 0.9, 0.95, 0.6, 1.0});
  CHECK(slow_scan(f, 0.7, +1).value() == 2);
  CHECK(slow_scan(f, 0.7, -1).value() == 3);
  CHECK(!slow_scan(f, 0.5, +1).has_value());
  CHECK(slow_scan(f, 0.91, +1, 0).value() == 0);
}

TEST_CASE("scan event: exact value is the finite-N product formula") {
  const RateLaw law{0.5, 1.0, 1.0, 0.5};
  for (double n : {1e2, 1e4, 1e6}) {
    const double thr = 0.5 + 1.0 / std::cbrt(n);
    const double len = std::floor(std::cbrt(n * n));
    const double direct = std::pow(1.0 - law.cdf(thr), len);
    CHECK(scan_event_exact(law, 1.0, 1.0, n) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK(scan_event_limit(law, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(std::abs(scan_event_exact(law, 1.0, 1.0, 1e8) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("scan event: Monte Carlo frequency within 4 standard errors") {
  const RateLaw law{0.5, 1.0, 1.0, 0.5};
  const ScanEstimate e = scan_event_probability(law, 1.0, 1.0, 1e3, 20000, 99);
  CHECK(e.scan_length == 100);
  const double sd = std::sqrt(e.exact * (1.0 - e.exact) / 20000.0);
  CHECK(std::abs(e.empirical - e.exact) < 4.0 * sd);
  const ScanEstimate again = scan_event_probability(law, 1.0, 1.0, 1e3, 20000, 99);
  CHECK(again.hits == e.hits);
}
