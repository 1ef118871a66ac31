#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rtasep/types.hpp"

namespace rtasep {

struct DerivedConstants {
  double alpha = 0.0;            // 1/(nu+2)
  double one_minus_alpha = 0.0;  // (nu+1)/(nu+2)
  double a_nu = 0.0;             // (nu+2)^(nu+2) / (nu+1)^(nu+1)
  ExtendedReal u_star = ExtendedReal::infinity();
  double rho_star = 0.0;  // 1/(1+u*), 0 when u* is infinite
};

/// Rate distribution on (c, 1]: density kappa(nu+1)(p-c)^nu on (c, c+eps],
/// plus an atom at p = 1 carrying the remaining mass.
///
/// The window mass kappa*eps^(nu+1) may not exceed one. Laws with nu <= 0
/// are valid; their critical gap is infinite.
class RateLaw {
 public:
  RateLaw(double c, double nu, double kappa, double eps);

  double c() const { return c_; }
  double nu() const { return nu_; }
  double kappa() const { return kappa_; }
  double eps() const { return eps_; }
  double window_mass() const { return window_mass_; }
  double top_mass() const { return 1.0 - window_mass_; }

  double cdf(double p) const;

  /// Inverse-transform draw from a uniform in (0, 1). The result is clamped
  /// strictly above c when the power map underflows.
  double quantile(double u) const;

  DerivedConstants constants() const;

  friend bool operator==(const RateLaw&, const RateLaw&) = default;

 private:
  double c_;
  double nu_;
  double kappa_;
  double eps_;
  double window_mass_;
};

/// Quenched rates p_i for a contiguous label window.
class DisorderField {
 public:
  DisorderField(RateLaw law, LabelRange labels, Seed seed);

  /// Field with explicit rates; every rate must lie in (c, 1].
  static DisorderField from_rates(RateLaw law, Label first, std::vector<double> rates);

  const RateLaw& law() const { return law_; }
  LabelRange labels() const { return labels_; }
  Seed seed() const { return seed_; }
  std::span<const double> rates() const { return rates_; }

  double rate(Label i) const;
  double min_rate() const;

  /// Two-column CSV: index,rate
  void write_csv(std::ostream& os) const;

 private:
  DisorderField(RateLaw law, LabelRange labels, Seed seed, std::vector<double> rates);

  RateLaw law_;
  LabelRange labels_;
  Seed seed_;
  std::vector<double> rates_;
};

/// Rate of label i under (law, seed). Pure; used by both fields and lazy scans.
double draw_rate(const RateLaw& law, Seed seed, Label i);

DisorderField sample_rates(const RateLaw& law, LabelRange labels, Seed seed);

/// int g(p - c) dF(p) over the power-law window, restricted to p - c > q_lo.
/// Adaptive tanh-sinh quadrature in q = p - c.
double window_integral(const RateLaw& law, const std::function<double(double)>& g, double q_lo = 0.0);

/// u* = int c/(p-c) dF(p), closed form for the parametric family.
ExtendedReal critical_gap(const RateLaw& law);

/// u* by adaptive quadrature over the window; throws for nu <= 0.
double critical_gap_quadrature(const RateLaw& law);

/// u(a) = int a/(p-a) dF(p) for a in [0, c].
double velocity_to_gap(const RateLaw& law, double a);

/// Inverse of velocity_to_gap on [0, u*). Throws std::domain_error for u >= u*
/// or when u* is infinite.
double gap_to_velocity(const RateLaw& law, double u);

/// Smallest k >= 0 with p_{origin + direction*k} <= threshold, scanning the
/// stored labels only. nullopt when the stored range is exhausted.
std::optional<std::int64_t> slow_scan(const DisorderField& field, double threshold,
                                      int direction, Label origin = 0);

struct ScanEstimate {
  double threshold = 0.0;        // c + q2 N^{-alpha}
  std::int64_t scan_length = 0;  // floor(q1 N^{1-alpha})
  std::int64_t replicas = 0;
  std::int64_t hits = 0;
  double empirical = 0.0;
  double std_error = 0.0;
  double exact = 0.0;  // (1 - F(threshold))^scan_length
  double limit = 0.0;  // exp(-kappa q1 q2^(nu+1))
};

double scan_event_exact(const RateLaw& law, double q1, double q2, double n);
double scan_event_limit(const RateLaw& law, double q1, double q2);

/// Monte Carlo frequency of "the first floor(q1 N^{1-alpha}) rates all exceed
/// c + q2 N^{-alpha}" over fresh disorder, with binomial standard error.
ScanEstimate scan_event_probability(const RateLaw& law, double q1, double q2, double n,
                                    std::int64_t replicas, Seed seed);

}  // namespace rtasep
