#include "rtasep/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtasep/rng.hpp"

namespace rtasep {

GapFamily parse_gap_family(const std::string& name) {
  if (name == "geometric") return GapFamily::geometric;
  if (name == "uniform") return GapFamily::uniform;
  if (name == "two_point") return GapFamily::two_point;
  throw std::invalid_argument("unknown gap family '" + name + "' (geometric | uniform | two_point)");
}

std::string to_string(GapFamily family) {
  switch (family) {
    case GapFamily::geometric: return "geometric";
    case GapFamily::uniform: return "uniform";
    case GapFamily::two_point: return "two_point";
  }
  return "?";
}

namespace {

std::int64_t resolved_upper(const IIDGapSpec& spec) {
  return spec.two_point_upper.value_or(static_cast<std::int64_t>(std::ceil(2.0 * spec.mean)));
}

}  // namespace

void IIDGapSpec::validate() const {
  if (!(mean > 0.0) || !std::isfinite(mean)) throw std::invalid_argument("gap spec: mean must be positive");
  if (family == GapFamily::uniform && mean != std::floor(mean)) {
    throw std::invalid_argument("gap spec: uniform family needs an integer mean");
  }
  if (family == GapFamily::two_point && static_cast<double>(resolved_upper(*this)) < mean) {
    throw std::invalid_argument("gap spec: two_point upper value must be at least the mean");
  }
}

double IIDGapSpec::variance() const {
  switch (family) {
    case GapFamily::geometric: return mean * (1.0 + mean);
    case GapFamily::uniform: {
      const double n = 2.0 * mean + 1.0;
      return (n * n - 1.0) / 12.0;
    }
    case GapFamily::two_point: return static_cast<double>(resolved_upper(*this)) * mean - mean * mean;
  }
  return 0.0;
}

double fastened_rate(const EquilibriumSpec& spec, double p) {
  return spec.fastening ? std::max(p, *spec.fastening) : p;
}

std::int64_t geometric_from_uniform(double ratio, double u) {
  if (ratio <= 0.0) return 0;
  return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(ratio)));
}

std::int64_t draw_equilibrium_gap(const DisorderField& field, const EquilibriumSpec& spec, Seed seed, Label i) {
  const double p_hat = fastened_rate(spec, field.rate(i));
  if (!(spec.a < p_hat)) {
    throw std::domain_error("equilibrium gaps: a >= rate at label " + std::to_string(i));
  }
  return geometric_from_uniform(spec.a / p_hat, counter_uniform(seed, Stream::gaps, i));
}

std::int64_t draw_iid_gap(const IIDGapSpec& spec, Seed seed, Label i) {
  const double u = counter_uniform(seed, Stream::gaps, i);
  switch (spec.family) {
    case GapFamily::geometric: return geometric_from_uniform(spec.mean / (1.0 + spec.mean), u);
    case GapFamily::uniform: {
      const auto n = static_cast<std::int64_t>(2.0 * spec.mean) + 1;
      return std::min<std::int64_t>(static_cast<std::int64_t>(u * static_cast<double>(n)), n - 1);
    }
    case GapFamily::two_point: {
      const std::int64_t upper = resolved_upper(spec);
      return u < spec.mean / static_cast<double>(upper) ? upper : 0;
    }
  }
  return 0;
}

GapConfig sample_equilibrium_gaps(const DisorderField& field, const EquilibriumSpec& spec, LabelRange gap_labels,
                                  Seed seed, Position anchor_position) {
  if (spec.a < 0.0) throw std::domain_error("equilibrium gaps: a must be nonnegative");
  std::vector<std::int64_t> gaps;
  gaps.reserve(static_cast<std::size_t>(gap_labels.size()));
  for (Label i = gap_labels.lo; i <= gap_labels.hi; ++i) gaps.push_back(draw_equilibrium_gap(field, spec, seed, i));
  return GapConfig(Anchor{gap_labels.lo, anchor_position}, std::move(gaps));
}

GapConfig sample_iid_gaps(const IIDGapSpec& spec, LabelRange gap_labels, Seed seed, Position anchor_position) {
  spec.validate();
  std::vector<std::int64_t> gaps;
  gaps.reserve(static_cast<std::size_t>(gap_labels.size()));
  for (Label i = gap_labels.lo; i <= gap_labels.hi; ++i) gaps.push_back(draw_iid_gap(spec, seed, i));
  return GapConfig(Anchor{gap_labels.lo, anchor_position}, std::move(gaps));
}

ParticleConfig jam_initial(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("jam_initial: n must be at least 1");
  std::vector<Position> pos(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) pos[static_cast<std::size_t>(k)] = -n + 1 + k;
  return ParticleConfig(-n + 1, std::move(pos));
}

double quenched_mean_gap(const DisorderField& field, const EquilibriumSpec& spec) {
  double sum = 0.0;
  for (double p : field.rates()) {
    const double p_hat = fastened_rate(spec, p);
    if (!(spec.a < p_hat)) throw std::domain_error("quenched mean gap: a >= some rate");
    sum += spec.a / (p_hat - spec.a);
  }
  return sum / static_cast<double>(field.rates().size());
}

double annealed_mean_gap(const RateLaw& law, const EquilibriumSpec& spec) {
  const double a = spec.a;
  if (!spec.fastening) return velocity_to_gap(law, a);
  const double floor = *spec.fastening;
  if (!(a >= 0.0 && a < floor)) throw std::domain_error("annealed mean gap: need 0 <= a < fastening floor");
  if (a == 0.0) return 0.0;
  const double c = law.c();
  // Rates at or below the floor all run at the floor.
  const double slow_mass = law.cdf(std::min(floor, 1.0));
  double total = slow_mass * a / (floor - a);
  const double q_floor = std::max(floor - c, 0.0);
  total += window_integral(law, [a, c](double q) { return a / (c + q - a); }, q_floor);
  if (floor < 1.0) total += law.top_mass() * a / (1.0 - a);
  return total;
}

}  // namespace rtasep
