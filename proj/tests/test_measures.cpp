#include <doctest.h>

#include <cmath>
#include <vector>

#include "rtasep/measures.hpp"
#include "rtasep/stats.hpp"

using namespace rtasep;

namespace {

const RateLaw kRef{0.5, 1.0, 4.0, 0.5};

double sample_mean(const GapConfig& g) {
  double s = 0.0;
  for (auto v : g.gaps()) s += static_cast<double>(v);
  return s / static_cast<double>(g.gaps().size());
}

}  // namespace

TEST_CASE("gap family names") {
  CHECK(parse_gap_family("two_point") == GapFamily::two_point);
  CHECK(to_string(GapFamily::uniform) == "uniform");
  CHECK_THROWS(parse_gap_family("poisson"));
}

TEST_CASE("iid gap specs validate and report variance") {
  CHECK_THROWS((IIDGapSpec{2.5, GapFamily::uniform, std::nullopt}.validate()));
  CHECK_THROWS((IIDGapSpec{3.0, GapFamily::two_point, 2}.validate()));
  CHECK_THROWS((IIDGapSpec{-1.0, GapFamily::geometric, std::nullopt}.validate()));
  // geometric with mean u: u(1+u); uniform on {0..2u}: u(u+1)/3; two-point: u(upper-u)
  CHECK(IIDGapSpec{3.0, GapFamily::geometric, std::nullopt}.variance() == doctest::Approx(12.0));
  CHECK(IIDGapSpec{3.0, GapFamily::uniform, std::nullopt}.variance() == doctest::Approx(4.0));
  CHECK(IIDGapSpec{3.0, GapFamily::two_point, std::nullopt}.variance() == doctest::Approx(9.0));
}

TEST_CASE("geometric draw from a uniform") {
  // P[k] = (1-r) r^k: u in (r, 1) gives 0, u in (r^2, r] gives 1.
  CHECK(geometric_from_uniform(0.5, 0.75) == 0);
  CHECK(geometric_from_uniform(0.5, 0.3) == 1);
  CHECK(geometric_from_uniform(0.5, 0.2) == 2);
  CHECK(geometric_from_uniform(0.0, 0.2) == 0);
}

TEST_CASE("iid gaps have the requested mean and variance") {
  for (GapFamily fam : {GapFamily::geometric, GapFamily::uniform, GapFamily::two_point}) {
    const IIDGapSpec spec{3.0, fam, std::nullopt};
    const GapConfig g = sample_iid_gaps(spec, {0, 99999}, 7);
    const double m = sample_mean(g);
    const double se = std::sqrt(spec.variance() / 1e5);
    CHECK(std::abs(m - 3.0) < 5.0 * se);
    for (auto v : g.gaps()) REQUIRE(v >= 0);
    if (fam == GapFamily::two_point) {
      for (auto v : g.gaps()) REQUIRE((v == 0 || v == 6));
    }
  }
  const GapConfig a = sample_iid_gaps({3.0, GapFamily::geometric, std::nullopt}, {5, 9}, 1, 100);
  CHECK(a.anchor() == Anchor{5, 100});
  CHECK(draw_iid_gap({3.0, GapFamily::geometric, std::nullopt}, 1, 7) == a.gap(7));
}

TEST_CASE("equilibrium gaps are geometric with ratio a/p_i") {
  const DisorderField f = DisorderField::from_rates(kRef, 0, std::vector<double>(50000, 0.8));
  const EquilibriumSpec spec{0.6, std::nullopt};
  const GapConfig g = sample_equilibrium_gaps(f, spec, {0, 49999}, 3);
  // mean a/(p-a) = 3, variance a p/(p-a)^2 = 12
  CHECK(std::abs(sample_mean(g) - 3.0) < 5.0 * std::sqrt(12.0 / 5e4));
  CHECK(quenched_mean_gap(f, spec) == doctest::Approx(3.0));
  std::vector<std::int64_t> counts(4, 0);
  for (auto v : g.gaps()) ++counts[static_cast<std::size_t>(std::min<std::int64_t>(v, 3))];
  const double r = 0.75;
  const std::vector<double> probs{1 - r, (1 - r) * r, (1 - r) * r * r, r * r * r};
  CHECK(stats::chi_square_gof(counts, probs).p_value > 1e-3);
}

TEST_CASE("equilibrium gaps need a below every rate") {
  const DisorderField f = DisorderField::from_rates(kRef, 0, {0.9, 0.55, 0.9});
  try {
    (void)sample_equilibrium_gaps(f, {0.6, std::nullopt}, {0, 2}, 1);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("label 1") != std::string::npos);
  }
  // fastening lifts the slow rate above a
  CHECK_NOTHROW((void)sample_equilibrium_gaps(f, {0.6, 0.7}, {0, 2}, 1));
  CHECK(fastened_rate({0.6, 0.7}, 0.55) == 0.7);
  CHECK(fastened_rate({0.6, std::nullopt}, 0.55) == 0.55);
}

TEST_CASE("annealed mean gap") {
  CHECK(annealed_mean_gap(kRef, {0.45, std::nullopt}) == doctest::Approx(velocity_to_gap(kRef, 0.45)));
  // Fastening at r: F(r) a/(r-a) + int_{p>r} a/(p-a) dF. Here F(0.7) = 4*0.04 = 0.16 and
  // int_{0.2}^{0.5} a/(q+0.5-a) 8q dq evaluated in closed form.
  const double a = 0.45, d = 0.5 - a;
  const double tail = 8.0 * a * ((0.5 - 0.2) - d * std::log((0.5 + d) / (0.2 + d)));
  CHECK(annealed_mean_gap(kRef, {a, 0.7}) == doctest::Approx(0.16 * a / (0.7 - a) + tail).epsilon(1e-8));
  // Fastening raises rates, so the mean gap shrinks.
  CHECK(annealed_mean_gap(kRef, {a, 0.7}) < annealed_mean_gap(kRef, {a, std::nullopt}));
  // With a fastening floor the mean stays finite at a = c.
  CHECK(std::isfinite(annealed_mean_gap(RateLaw(0.5, 0.0, 2.0, 0.5), {0.5, 0.6})));
}

TEST_CASE("jam initial condition") {
  const ParticleConfig j = jam_initial(4);
  CHECK(j.labels() == LabelRange{-3, 0});
  for (Label i = -3; i <= 0; ++i) CHECK(j.position(i) == i);
}
