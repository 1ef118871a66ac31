#include "rtasep/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rtasep/rng.hpp"

namespace rtasep {

namespace {

constexpr double kQuadratureTolerance = 1e-12;

}  // namespace

double window_integral(const RateLaw& law, const std::function<double(double)>& g, double q_lo) {
  const double q_hi = law.eps();
  if (q_lo >= q_hi) return 0.0;
  const double nu = law.nu();
  const double scale = law.kappa() * (nu + 1.0);
  auto integrand = [&](double q) {
    if (q <= 0.0) return 0.0;
    return g(q) * scale * std::pow(q, nu);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(integrand, q_lo, q_hi, kQuadratureTolerance);
}

RateLaw::RateLaw(double c, double nu, double kappa, double eps)
    : c_(c), nu_(nu), kappa_(kappa), eps_(eps), window_mass_(0.0) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("rate law: c must lie in (0,1)");
  if (!(nu > -1.0) || !std::isfinite(nu)) throw std::invalid_argument("rate law: nu must exceed -1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("rate law: kappa must be positive");
  if (!(eps > 0.0 && eps <= 1.0 - c + 1e-15))
    throw std::invalid_argument("rate law: eps must lie in (0, 1-c]");
  window_mass_ = kappa * std::pow(eps, nu + 1.0);
  if (window_mass_ > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "rate law: kappa*eps^(nu+1) = " << window_mass_ << " exceeds 1";
    throw std::invalid_argument(msg.str());
  }
  window_mass_ = std::min(window_mass_, 1.0);
}

double RateLaw::cdf(double p) const {
  if (p <= c_) return 0.0;
  if (p >= 1.0) return 1.0;
  if (p <= c_ + eps_) return std::min(window_mass_, kappa_ * std::pow(p - c_, nu_ + 1.0));
  return window_mass_;
}

double RateLaw::quantile(double u) const {
  if (u >= window_mass_) return 1.0;
  const double p = c_ + eps_ * std::pow(u / window_mass_, 1.0 / (nu_ + 1.0));
  return std::max(p, std::nextafter(c_, 2.0));
}

DerivedConstants RateLaw::constants() const {
  DerivedConstants k;
  k.alpha = 1.0 / (nu_ + 2.0);
  k.one_minus_alpha = (nu_ + 1.0) / (nu_ + 2.0);
  k.a_nu = std::exp((nu_ + 2.0) * std::log(nu_ + 2.0) - (nu_ + 1.0) * std::log(nu_ + 1.0));
  k.u_star = critical_gap(*this);
  k.rho_star = k.u_star.is_finite() ? 1.0 / (1.0 + k.u_star.value()) : 0.0;
  return k;
}

DisorderField::DisorderField(RateLaw law, LabelRange labels, Seed seed)
    : law_(law), labels_(labels), seed_(seed) {
  if (labels.empty()) throw std::invalid_argument("disorder field: empty label range");
  rates_.resize(static_cast<std::size_t>(labels.size()));
  for (Label i = labels.lo; i <= labels.hi; ++i) rates_[labels.offset(i)] = draw_rate(law_, seed_, i);
}

DisorderField::DisorderField(RateLaw law, LabelRange labels, Seed seed, std::vector<double> rates)
    : law_(law), labels_(labels), seed_(seed), rates_(std::move(rates)) {}

DisorderField DisorderField::from_rates(RateLaw law, Label first, std::vector<double> rates) {
  if (rates.empty()) throw std::invalid_argument("disorder field: no rates");
  for (double p : rates) {
    if (!(p > law.c() && p <= 1.0)) throw std::invalid_argument("disorder field: rate outside (c,1]");
  }
  const LabelRange labels{first, first + static_cast<Label>(rates.size()) - 1};
  return DisorderField(law, labels, 0, std::move(rates));
}

double DisorderField::rate(Label i) const {
  if (!labels_.contains(i)) {
    throw std::out_of_range("disorder field: label " + std::to_string(i) + " not stored");
  }
  return rates_[labels_.offset(i)];
}

double DisorderField::min_rate() const { return *std::min_element(rates_.begin(), rates_.end()); }

void DisorderField::write_csv(std::ostream& os) const {
  os << "index,rate\n";
  const auto old_precision = os.precision(17);
  for (Label i = labels_.lo; i <= labels_.hi; ++i) os << i << ',' << rates_[labels_.offset(i)] << '\n';
  os.precision(old_precision);
}

double draw_rate(const RateLaw& law, Seed seed, Label i) {
  return law.quantile(counter_uniform(seed, Stream::rates, i));
}

DisorderField sample_rates(const RateLaw& law, LabelRange labels, Seed seed) {
  return DisorderField(law, labels, seed);
}

ExtendedReal critical_gap(const RateLaw& law) {
  if (law.nu() <= 0.0) return ExtendedReal::infinity();
  const double c = law.c();
  const double window = c * law.kappa() * (law.nu() + 1.0) / law.nu() * std::pow(law.eps(), law.nu());
  const double atom = law.top_mass() * c / (1.0 - c);
  return ExtendedReal(window + atom);
}

double critical_gap_quadrature(const RateLaw& law) {
  if (law.nu() <= 0.0) throw std::domain_error("critical gap is infinite for nu <= 0");
  const double c = law.c();
  const double window = window_integral(law, [c](double q) { return c / q; });
  return window + law.top_mass() * c / (1.0 - c);
}

double velocity_to_gap(const RateLaw& law, double a) {
  const double c = law.c();
  if (!(a >= 0.0 && a <= c)) throw std::domain_error("velocity_to_gap: a must lie in [0, c]");
  if (a == 0.0) return 0.0;
  if (a == c) {
    const ExtendedReal u_star = critical_gap(law);
    if (u_star.is_infinite()) throw std::domain_error("velocity_to_gap: u(c) is infinite for nu <= 0");
    return u_star.value();
  }
  const double shift = c - a;
  const double window = window_integral(law, [a, shift](double q) { return a / (q + shift); });
  return window + law.top_mass() * a / (1.0 - a);
}

double gap_to_velocity(const RateLaw& law, double u) {
  const ExtendedReal u_star = critical_gap(law);
  if (u_star.is_infinite()) throw std::domain_error("gap_to_velocity: requires a finite critical gap (nu > 0)");
  if (!(u >= 0.0)) throw std::domain_error("gap_to_velocity: u must be nonnegative");
  if (u >= u_star.value()) throw std::domain_error("gap_to_velocity: u must be below u*");
  if (u == 0.0) return 0.0;
  double lo = 0.0;
  double hi = law.c();
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * law.c(); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (velocity_to_gap(law, mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<std::int64_t> slow_scan(const DisorderField& field, double threshold, int direction,
                                      Label origin) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("slow_scan: direction must be +1 or -1");
  const LabelRange labels = field.labels();
  for (std::int64_t k = 0;; ++k) {
    const Label i = origin + direction * k;
    if (!labels.contains(i)) return std::nullopt;
    if (field.rate(i) <= threshold) return k;
  }
}

namespace {

struct ScanGeometry {
  double threshold;
  std::int64_t length;
};

ScanGeometry scan_geometry(const RateLaw& law, double q1, double q2, double n) {
  if (!(q1 >= 0.0) || !(q2 >= 0.0) || !(n > 0.0)) {
    throw std::invalid_argument("scan: q1, q2 must be nonnegative and N positive");
  }
  const DerivedConstants k = law.constants();
  return {law.c() + q2 * std::pow(n, -k.alpha),
          // pow(1e3, 2/3) is 99.999...; do not let rounding drop an integer.
          static_cast<std::int64_t>(std::floor(q1 * std::pow(n, k.one_minus_alpha) * (1.0 + 1e-12)))};
}

}  // namespace

double scan_event_exact(const RateLaw& law, double q1, double q2, double n) {
  const ScanGeometry g = scan_geometry(law, q1, q2, n);
  const double f = law.cdf(g.threshold);
  return std::exp(static_cast<double>(g.length) * std::log1p(-f));
}

double scan_event_limit(const RateLaw& law, double q1, double q2) {
  return std::exp(-law.kappa() * q1 * std::pow(q2, law.nu() + 1.0));
}

ScanEstimate scan_event_probability(const RateLaw& law, double q1, double q2, double n,
                                    std::int64_t replicas, Seed seed) {
  if (replicas < 1) throw std::invalid_argument("scan_event_probability: replicas must be >= 1");
  const ScanGeometry g = scan_geometry(law, q1, q2, n);
  // For an inverse-transform draw p = F^{-1}(U), p <= threshold iff U <= F(threshold).
  const double f = law.cdf(g.threshold);
  ScanEstimate est;
  est.threshold = g.threshold;
  est.scan_length = g.length;
  est.replicas = replicas;
  for (std::int64_t r = 0; r < replicas; ++r) {
    const Seed field_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    bool all_fast = true;
    for (Label i = 0; i < g.length; ++i) {
      if (counter_uniform(field_seed, Stream::rates, i) <= f) {
        all_fast = false;
        break;
      }
    }
    if (all_fast) ++est.hits;
  }
  const double p = static_cast<double>(est.hits) / static_cast<double>(replicas);
  est.empirical = p;
  est.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(replicas));
  est.exact = scan_event_exact(law, q1, q2, n);
  est.limit = scan_event_limit(law, q1, q2);
  return est;
}

}  // namespace rtasep
