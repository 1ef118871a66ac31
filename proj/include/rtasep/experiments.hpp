#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rtasep/disorder.hpp"
#include "rtasep/measures.hpp"
#include "rtasep/stats.hpp"

namespace rtasep {

/// A run whose configuration violates the hypotheses of the estimator.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Calls f(i) for i = 0..n-1 on up to `jobs` threads. Results are stored by
/// index, so the output never depends on scheduling.
template <class R, class F>
std::vector<R> run_replicas(std::int64_t n, int jobs, F&& f) {
  std::vector<R> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::int64_t>(n, 1))));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct TailPoint {
  double param = 0.0;
  std::int64_t hits = 0;
  std::int64_t n = 0;
  double empirical = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  double bound_lower = 0.0;
  double bound_upper = 1.0;
};

struct TailCurve {
  double t = 0.0;
  std::vector<TailPoint> points;
};

struct ScalingFit {
  std::vector<double> t;
  std::vector<double> statistic;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  bool valid = false;  // false when a statistic is not positive
};

/// Empirical P(sample > threshold(param)) over `grid` with Wilson intervals.
TailCurve tail_curve(double t, const std::vector<double>& sample, const std::vector<double>& grid,
                     const std::function<double(double)>& threshold, const std::function<double(double)>& lower,
                     const std::function<double(double)>& upper);

ScalingFit fit_scaling(const std::vector<double>& t, const std::vector<double>& statistic);

/// Distance of each empirical value to [lo, hi] must not grow with t, except
/// for at most `allowed` steps whose confidence intervals overlap.
struct TrendCheck {
  std::vector<double> distance;
  int inversions = 0;
  bool passed = false;
};
TrendCheck trend_toward(const std::vector<TailPoint>& by_horizon, double lo, double hi, int allowed = 1);

// ---- Theorem 1: tagged particle behind i.i.d. gaps of mean u > u* ----

struct Theorem1Config {
  RateLaw law{0.5, 1.0, 4.0, 0.5};
  IIDGapSpec gaps{3.0, GapFamily::geometric, std::nullopt};
  std::vector<double> horizons{1e3, 1e4, 1e5};
  std::vector<double> z_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  std::int64_t replicas = 200;
  Seed seed = 0;
  int jobs = 1;
};

struct Theorem1Bounds {
  double kappa = 0.0;
  double nu = 0.0;
  double a_nu = 0.0;
  double excess = 0.0;  // u - u*
  double lower(double z) const;
  double upper(double z) const;
};

struct Theorem1Result {
  Theorem1Bounds bounds;
  double u_star = 0.0;
  std::vector<std::vector<std::int64_t>> displacement;  // [horizon][replica]
  std::vector<TailCurve> tails;                          // w(t) = (sigma_0(t) - ct) / t^{1-alpha}
  ScalingFit fit;                                        // median of sigma_0(t) - ct
};

void validate(const Theorem1Config& cfg);
Theorem1Result theorem1(const Theorem1Config& cfg);

// ---- Jam release: front count X_t (Theorems 2-4) ----

struct FrontConfig {
  RateLaw law{0.5, 1.0, 4.0, 0.5};
  std::vector<double> horizons{1e3, 1e4, 1e5};
  std::int64_t replicas = 200;
  Seed seed = 0;
  int jobs = 1;
};

/// X_t per [horizon][replica], fresh disorder per replica.
std::vector<std::vector<std::int64_t>> front_counts(const FrontConfig& cfg);

struct Theorem2Bounds {
  double kappa = 0.0;
  double nu = 0.0;
  double a_nu = 0.0;
  double u_star = 0.0;
  double lower(double b) const;
  double upper(double b) const;
};

struct Theorem2Result {
  Theorem2Bounds bounds;
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<TailCurve> tails;  // P(X_t > b t^{1-alpha})
  ScalingFit fit;                // median X_t
};

void validate_theorem2(const RateLaw& law);
Theorem2Result theorem2(const FrontConfig& cfg, const std::vector<double>& b_grid);

struct WindowCell {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::int64_t hits = 0;
  std::int64_t n = 0;
  double frequency = 0.0;
  stats::Interval ci;
};

struct Theorem3Result {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<WindowCell> cells;  // P(a t^{1/2}/log t <= X_t <= b t^{1/2})
  std::vector<double> median_scaled;  // median of X_t t^{-1/2} per horizon
};

void validate_theorem3(const RateLaw& law);
Theorem3Result theorem3(const FrontConfig& cfg, const std::vector<double>& a_grid, const std::vector<double>& b_grid);

struct Theorem4Result {
  std::vector<std::vector<std::int64_t>> counts;
  ScalingFit fit;  // median X_t
  double lower_exponent = 0.0;  // (1+nu)/(3+nu)
  double upper_exponent = 0.0;  // (1+nu)/2
  double margin = 0.1;
  bool in_bracket() const;
};

void validate_theorem4(const RateLaw& law);
Theorem4Result theorem4(const FrontConfig& cfg, double margin);

// ---- Coupling monotonicity ----

/// Basic coupling: two gap configurations eta <= eta' run on one schedule.
/// Fastened coupling: one configuration under max(p, floor) and under p via
/// thinning. Every ring of every trial is checked.
struct CouplingConfig {
  RateLaw law{0.5, 1.0, 4.0, 0.5};
  std::int64_t trials = 1000;
  std::int64_t max_particles = 30;
  double t_max = 20.0;
  double gap_mean = 3.0;
  double floor_fraction = 0.5;  // floor = c + floor_fraction * eps
  Seed seed = 0;
};

struct CouplingReport {
  std::int64_t trials = 0;
  std::int64_t events = 0;
  std::int64_t basic_violations = 0;     // trials with some eta_i > eta'_i
  std::int64_t fastened_violations = 0;  // trials with some fast sigma_i < slow sigma_i
};

CouplingReport coupling_check(const CouplingConfig& cfg);

// ---- Rate scan event ----

struct Lemma1Config {
  RateLaw law{0.5, 1.0, 1.0, 0.5};
  std::vector<double> q1{1.0};
  std::vector<double> q2{1.0};
  std::vector<double> n_grid{1e4, 1e6, 1e8};
  std::int64_t replicas = 100000;
  double mc_max_n = 1e6;  // Monte Carlo only up to this N
  Seed seed = 0;
};

struct Lemma1Point {
  double q1 = 0.0;
  double q2 = 0.0;
  double n = 0.0;
  bool sampled = false;
  ScanEstimate estimate;
  double z_score() const;  // (empirical - exact) / sd at the exact value
};

std::vector<Lemma1Point> lemma1_curve(const Lemma1Config& cfg);

// ---- Equilibrium and Burke property ----

struct BurkeConfig {
  RateLaw law{0.5, 1.0, 4.0, 0.5};
  double a = 0.45;
  double t = 100.0;
  std::int64_t replicas = 10000;
  std::int64_t field_labels = 10000;
  std::int64_t window = 64;  // labels 0..window, driver at window + 1
  std::int64_t intervals_per_replica = 5;
  Seed seed = 0;
  int jobs = 1;
};

struct BurkeResult {
  double p0 = 0.0;
  double expected_mean = 0.0;  // a t
  std::vector<double> increments;
  std::vector<std::int64_t> tagged_gap;  // eta_0(t)
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  double dispersion = 0.0;  // variance / mean
  std::vector<std::int64_t> gap_bins;   // observed counts; last bin is the tail
  std::vector<double> gap_probs;
  stats::TestResult gap_chi2;
  stats::TestResult interjump_ks;
  std::int64_t interjump_samples = 0;
};

void validate(const BurkeConfig& cfg);
BurkeResult burke_check(const BurkeConfig& cfg);

// ---- Constant-rate calibration ----

struct RostConfig {
  double rate = 1.0;
  double t = 1e4;
  std::int64_t replicas = 100;
  std::vector<double> x_grid{-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
  double halfwidth = 0.1;
  Seed seed = 0;
  int jobs = 1;
};

struct RostBin {
  double x = 0.0;
  double density = 0.0;
  double std_error = 0.0;
  double profile = 0.0;      // r1(x)
  double profile_bin = 0.0;  // r1 averaged over the bin
};

/// r1(x): 1 for x <= -1, (1-x)/2 on (-1, 1], 0 beyond.
double rost_profile_value(double x);
std::vector<RostBin> rost_profile(const RostConfig& cfg);

struct GlynnWhittConfig {
  double rate = 1.0;
  double a = 1.0;
  double gamma = 0.5;
  std::vector<double> horizons{1e3, 1e4, 1e5};
  std::int64_t replicas = 100;
  Seed seed = 0;
  int jobs = 1;
};

struct GlynnWhittRow {
  double t = 0.0;
  std::int64_t depth = 0;
  double mean = 0.0;
  double sd = 0.0;
  double std_error = 0.0;
  double limit = 0.0;  // -2 sqrt(a)
};

std::vector<GlynnWhittRow> glynn_whitt_benchmark(const GlynnWhittConfig& cfg);

// ---- CSV writers ----

void write_tail_csv(std::ostream& os, const TailCurve& curve);
void write_scaling_csv(std::ostream& os, const ScalingFit& fit);
void write_samples_csv(std::ostream& os, const std::vector<double>& horizons,
                       const std::vector<std::vector<std::int64_t>>& samples, const std::string& column);
void write_lemma1_csv(std::ostream& os, const std::vector<Lemma1Point>& points);
void write_window_csv(std::ostream& os, const std::vector<WindowCell>& cells);
void write_rost_csv(std::ostream& os, const std::vector<RostBin>& bins);
void write_glynn_whitt_csv(std::ostream& os, const std::vector<GlynnWhittRow>& rows);
void write_burke_csv(std::ostream& os, const BurkeResult& r);

}  // namespace rtasep
