#include "rtasep/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "rtasep/engine.hpp"
#include "rtasep/recursion.hpp"
#include "rtasep/rng.hpp"

namespace rtasep {

namespace {

std::vector<double> to_doubles(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

void check_common(std::int64_t replicas, const std::vector<double>& horizons) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (horizons.empty()) throw std::invalid_argument("at least one horizon is required");
  for (double t : horizons) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("horizons must be positive");
  }
}

// Rows are [replica][horizon] from the workers; callers want [horizon][replica].
std::vector<std::vector<std::int64_t>> transpose(const std::vector<std::vector<std::int64_t>>& rows,
                                                 std::size_t horizons) {
  std::vector<std::vector<std::int64_t>> out(horizons, std::vector<std::int64_t>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t h = 0; h < horizons; ++h) out[h][r] = rows[r][h];
  }
  return out;
}

class CsvPrecision {
 public:
  explicit CsvPrecision(std::ostream& os) : os_(os), old_(os.precision(12)) {}
  ~CsvPrecision() { os_.precision(old_); }

 private:
  std::ostream& os_;
  std::streamsize old_;
};

}  // namespace

TailCurve tail_curve(double t, const std::vector<double>& sample, const std::vector<double>& grid,
                     const std::function<double(double)>& threshold, const std::function<double(double)>& lower,
                     const std::function<double(double)>& upper) {
  TailCurve curve;
  curve.t = t;
  const auto n = static_cast<std::int64_t>(sample.size());
  for (double g : grid) {
    TailPoint p;
    p.param = g;
    p.n = n;
    const double thr = threshold(g);
    for (double v : sample) p.hits += v > thr ? 1 : 0;
    p.empirical = n > 0 ? static_cast<double>(p.hits) / static_cast<double>(n) : 0.0;
    const stats::Interval ci = stats::wilson_interval(p.hits, n);
    p.ci_lo = ci.lo;
    p.ci_hi = ci.hi;
    p.bound_lower = lower(g);
    p.bound_upper = upper(g);
    curve.points.push_back(p);
  }
  return curve;
}

ScalingFit fit_scaling(const std::vector<double>& t, const std::vector<double>& statistic) {
  ScalingFit fit;
  fit.t = t;
  fit.statistic = statistic;
  fit.valid = t.size() >= 2 && std::all_of(statistic.begin(), statistic.end(), [](double v) { return v > 0.0; });
  if (!fit.valid) {
    fit.slope = fit.slope_se = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const stats::LineFit lf = stats::loglog_fit(t, statistic);
  fit.slope = lf.slope;
  fit.slope_se = lf.slope_se;
  fit.intercept = lf.intercept;
  return fit;
}

TrendCheck trend_toward(const std::vector<TailPoint>& by_horizon, double lo, double hi, int allowed) {
  TrendCheck check;
  for (const TailPoint& p : by_horizon) {
    check.distance.push_back(std::max({0.0, lo - p.empirical, p.empirical - hi}));
  }
  bool ok = true;
  for (std::size_t h = 1; h < by_horizon.size(); ++h) {
    if (check.distance[h] <= check.distance[h - 1]) continue;
    ++check.inversions;
    const bool overlap =
        by_horizon[h].ci_lo <= by_horizon[h - 1].ci_hi && by_horizon[h - 1].ci_lo <= by_horizon[h].ci_hi;
    if (!overlap) ok = false;
  }
  check.passed = ok && check.inversions <= allowed;
  return check;
}

// ---- Theorem 1 ----

double Theorem1Bounds::lower(double z) const { return std::exp(-kappa / excess * std::pow(z, nu + 2.0)); }
double Theorem1Bounds::upper(double z) const { return std::exp(-kappa / (a_nu * excess) * std::pow(z, nu + 2.0)); }

void validate(const Theorem1Config& cfg) {
  if (!(cfg.law.nu() > 0.0)) throw HypothesisError("thm1 requires nu > 0");
  cfg.gaps.validate();
  const double u_star = critical_gap(cfg.law).value();
  if (!(cfg.gaps.mean > u_star)) {
    throw HypothesisError("thm1 requires u > u* (u = " + std::to_string(cfg.gaps.mean) +
                          ", u* = " + std::to_string(u_star) + ")");
  }
  check_common(cfg.replicas, cfg.horizons);
}

Theorem1Result theorem1(const Theorem1Config& cfg) {
  validate(cfg);
  const DerivedConstants k = cfg.law.constants();
  Theorem1Result res;
  res.u_star = k.u_star.value();
  res.bounds = {cfg.law.kappa(), cfg.law.nu(), k.a_nu, cfg.gaps.mean - res.u_star};
  const double c = cfg.law.c();
  const double t_max = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  const double guess = c * t_max + 3.0 * std::pow(t_max, k.one_minus_alpha) + 8.0 * std::sqrt(t_max) + 32.0;

  auto rows = run_replicas<std::vector<std::int64_t>>(cfg.replicas, cfg.jobs, [&](std::int64_t r) {
    const Seed rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const RateFn rate = [&, rs](Label j) { return draw_rate(cfg.law, rs, j); };
    const GapFn gap = [&, rs](Label j) { return draw_iid_gap(cfg.gaps, rs, j); };
    const double p0 = rate(0);
    const double cap = p0 * t_max + 6.0 * std::sqrt(p0 * t_max) + 16.0;
    return tagged_displacement(rate, gap, rs, cfg.horizons, static_cast<std::int64_t>(std::ceil(std::min(guess, cap))));
  });
  res.displacement = transpose(rows, cfg.horizons.size());

  std::vector<double> medians;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double t = cfg.horizons[h];
    const double scale = std::pow(t, k.one_minus_alpha);
    std::vector<double> excess;
    std::vector<double> w;
    for (std::int64_t s : res.displacement[h]) {
      excess.push_back(static_cast<double>(s) - c * t);
      w.push_back(excess.back() / scale);
    }
    medians.push_back(stats::median(excess));
    const Theorem1Bounds b = res.bounds;
    res.tails.push_back(tail_curve(
        t, w, cfg.z_grid, [](double z) { return z; }, [b](double z) { return b.lower(z); },
        [b](double z) { return b.upper(z); }));
  }
  res.fit = fit_scaling(cfg.horizons, medians);
  return res;
}

// ---- Jam front ----

std::vector<std::vector<std::int64_t>> front_counts(const FrontConfig& cfg) {
  check_common(cfg.replicas, cfg.horizons);
  auto rows = run_replicas<std::vector<std::int64_t>>(cfg.replicas, cfg.jobs, [&](std::int64_t r) {
    const Seed rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const RateFn rate = [&, rs](Label j) { return draw_rate(cfg.law, rs, j); };
    return jam_front_count(rate, rs, cfg.horizons, cfg.law.c());
  });
  return transpose(rows, cfg.horizons.size());
}

double Theorem2Bounds::upper(double b) const { return std::exp(-kappa * std::pow(b, nu + 2.0) / a_nu); }
double Theorem2Bounds::lower(double b) const {
  return std::exp(-a_nu * std::pow(1.0 + u_star, nu + 1.0) * kappa * std::pow(b, nu + 2.0));
}

void validate_theorem2(const RateLaw& law) {
  if (!(law.nu() > 0.0)) throw HypothesisError("thm2 requires nu > 0");
}

Theorem2Result theorem2(const FrontConfig& cfg, const std::vector<double>& b_grid) {
  validate_theorem2(cfg.law);
  const DerivedConstants k = cfg.law.constants();
  Theorem2Result res;
  res.bounds = {cfg.law.kappa(), cfg.law.nu(), k.a_nu, k.u_star.value()};
  res.counts = front_counts(cfg);
  std::vector<double> medians;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double t = cfg.horizons[h];
    const double scale = std::pow(t, k.one_minus_alpha);
    const auto x = to_doubles(res.counts[h]);
    medians.push_back(stats::median(x));
    const Theorem2Bounds b = res.bounds;
    res.tails.push_back(tail_curve(
        t, x, b_grid, [scale](double bb) { return bb * scale; }, [b](double bb) { return b.lower(bb); },
        [b](double bb) { return b.upper(bb); }));
  }
  res.fit = fit_scaling(cfg.horizons, medians);
  return res;
}

void validate_theorem3(const RateLaw& law) {
  if (law.nu() != 0.0) throw HypothesisError("thm3 requires nu = 0");
}

Theorem3Result theorem3(const FrontConfig& cfg, const std::vector<double>& a_grid, const std::vector<double>& b_grid) {
  validate_theorem3(cfg.law);
  for (double t : cfg.horizons) {
    if (!(t > 1.0)) throw std::invalid_argument("thm3 horizons must exceed 1 (log t in the window)");
  }
  Theorem3Result res;
  res.counts = front_counts(cfg);
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    const double t = cfg.horizons[h];
    const double root = std::sqrt(t);
    std::vector<double> scaled;
    for (std::int64_t x : res.counts[h]) scaled.push_back(static_cast<double>(x) / root);
    res.median_scaled.push_back(stats::median(scaled));
    for (double a : a_grid) {
      for (double b : b_grid) {
        WindowCell cell;
        cell.t = t;
        cell.a = a;
        cell.b = b;
        cell.n = static_cast<std::int64_t>(res.counts[h].size());
        const double lo = a * root / std::log(t);
        const double hi = b * root;
        for (std::int64_t x : res.counts[h]) {
          const auto xd = static_cast<double>(x);
          cell.hits += (xd >= lo && xd <= hi) ? 1 : 0;
        }
        cell.frequency = static_cast<double>(cell.hits) / static_cast<double>(cell.n);
        cell.ci = stats::wilson_interval(cell.hits, cell.n);
        res.cells.push_back(cell);
      }
    }
  }
  return res;
}

bool Theorem4Result::in_bracket() const {
  return fit.valid && fit.slope >= lower_exponent - margin && fit.slope <= upper_exponent + margin;
}

void validate_theorem4(const RateLaw& law) {
  if (!(law.nu() < 0.0)) throw HypothesisError("thm4 requires -1 < nu < 0");
}

Theorem4Result theorem4(const FrontConfig& cfg, double margin) {
  validate_theorem4(cfg.law);
  Theorem4Result res;
  const double nu = cfg.law.nu();
  res.lower_exponent = (1.0 + nu) / (3.0 + nu);
  res.upper_exponent = (1.0 + nu) / 2.0;
  res.margin = margin;
  res.counts = front_counts(cfg);
  std::vector<double> medians;
  for (const auto& row : res.counts) medians.push_back(stats::median(to_doubles(row)));
  res.fit = fit_scaling(cfg.horizons, medians);
  return res;
}

// ---- Rate scan ----

double Lemma1Point::z_score() const {
  if (!sampled) return 0.0;
  const double p = estimate.exact;
  const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(estimate.replicas));
  if (sd == 0.0) return estimate.empirical == p ? 0.0 : std::numeric_limits<double>::infinity();
  return (estimate.empirical - p) / sd;
}

std::vector<Lemma1Point> lemma1_curve(const Lemma1Config& cfg) {
  if (cfg.replicas < 1) throw std::invalid_argument("lemma1: replicas must be >= 1");
  std::vector<Lemma1Point> out;
  for (double q1 : cfg.q1) {
    for (double q2 : cfg.q2) {
      for (double n : cfg.n_grid) {
        Lemma1Point p;
        p.q1 = q1;
        p.q2 = q2;
        p.n = n;
        p.sampled = n <= cfg.mc_max_n;
        if (p.sampled) {
          p.estimate = scan_event_probability(cfg.law, q1, q2, n, cfg.replicas, cfg.seed);
        } else {
          const DerivedConstants k = cfg.law.constants();
          p.estimate.threshold = cfg.law.c() + q2 * std::pow(n, -k.alpha);
          p.estimate.scan_length = static_cast<std::int64_t>(std::floor(q1 * std::pow(n, k.one_minus_alpha)));
          p.estimate.exact = scan_event_exact(cfg.law, q1, q2, n);
          p.estimate.limit = scan_event_limit(cfg.law, q1, q2);
          p.estimate.empirical = std::numeric_limits<double>::quiet_NaN();
          p.estimate.std_error = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(p);
      }
    }
  }
  return out;
}

// ---- Burke ----

void validate(const BurkeConfig& cfg) {
  if (cfg.replicas < 2) throw std::invalid_argument("burke: replicas must be >= 2");
  if (!(cfg.t > 0.0)) throw std::invalid_argument("burke: t must be positive");
  if (cfg.window < 0 || cfg.window + 1 >= cfg.field_labels) {
    throw std::invalid_argument("burke: need 0 <= window and window + 1 < field_labels");
  }
  if (!(cfg.a > 0.0 && cfg.a < cfg.law.c())) throw HypothesisError("burke requires 0 < a < c");
  if (cfg.intervals_per_replica < 1) throw std::invalid_argument("burke: intervals_per_replica must be >= 1");
}

BurkeResult burke_check(const BurkeConfig& cfg) {
  validate(cfg);
  const DisorderField field = sample_rates(cfg.law, {0, cfg.field_labels - 1}, cfg.seed);
  const Label driver = cfg.window + 1;
  std::vector<double> rates;
  for (Label i = 0; i <= cfg.window; ++i) rates.push_back(field.rate(i));
  rates.push_back(cfg.a);
  const EquilibriumSpec eq{cfg.a, std::nullopt};

  struct Replica {
    double increment = 0.0;
    std::int64_t gap0 = 0;
    std::vector<double> intervals;
  };
  auto reps = run_replicas<Replica>(cfg.replicas, cfg.jobs, [&](std::int64_t r) {
    const Seed rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const ParticleConfig initial = gaps_to_particles(sample_equilibrium_gaps(field, eq, {0, cfg.window}, rs));
    const ClockSchedule clocks(rs, {0, driver}, rates);
    RunOptions opts;
    opts.tracked = {0};
    SimulationRun run(initial, clocks, opts);
    run.run(cfg.t);
    Replica out;
    out.increment = static_cast<double>(run.position(0) - initial.position(0));
    out.gap0 = run.position(1) - run.position(0) - 1;
    double prev = 0.0;
    for (double tj : run.jump_times(0)) {
      if (static_cast<std::int64_t>(out.intervals.size()) >= cfg.intervals_per_replica) break;
      out.intervals.push_back(tj - prev);
      prev = tj;
    }
    return out;
  });

  BurkeResult res;
  res.p0 = field.rate(0);
  res.expected_mean = cfg.a * cfg.t;
  std::vector<double> intervals;
  for (const Replica& r : reps) {
    res.increments.push_back(r.increment);
    res.tagged_gap.push_back(r.gap0);
    intervals.insert(intervals.end(), r.intervals.begin(), r.intervals.end());
  }
  res.mean = stats::mean(res.increments);
  res.variance = stats::variance(res.increments);
  res.std_error = std::sqrt(res.variance / static_cast<double>(res.increments.size()));
  res.dispersion = res.variance / res.mean;

  const double ratio = cfg.a / res.p0;
  const auto n = static_cast<double>(res.tagged_gap.size());
  std::int64_t bins = 1;
  while (n * (1.0 - ratio) * std::pow(ratio, static_cast<double>(bins)) >= 5.0 &&
         n * std::pow(ratio, static_cast<double>(bins + 1)) >= 5.0) {
    ++bins;
  }
  res.gap_bins.assign(static_cast<std::size_t>(bins + 1), 0);
  for (std::int64_t k = 0; k < bins; ++k) {
    res.gap_probs.push_back((1.0 - ratio) * std::pow(ratio, static_cast<double>(k)));
  }
  res.gap_probs.push_back(std::pow(ratio, static_cast<double>(bins)));
  for (std::int64_t g : res.tagged_gap) ++res.gap_bins[static_cast<std::size_t>(std::min(g, bins))];
  res.gap_chi2 = stats::chi_square_gof(res.gap_bins, res.gap_probs);

  const double a = cfg.a;
  res.interjump_samples = static_cast<std::int64_t>(intervals.size());
  res.interjump_ks = stats::ks_one_sample(intervals, [a](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-a * x); });
  return res;
}

// ---- Constant-rate calibration ----

double rost_profile_value(double x) {
  if (x <= -1.0) return 1.0;
  if (x <= 1.0) return (1.0 - x) / 2.0;
  return 0.0;
}

std::vector<RostBin> rost_profile(const RostConfig& cfg) {
  if (cfg.replicas < 1) throw std::invalid_argument("rost: replicas must be >= 1");
  if (!(cfg.t > 0.0) || !(cfg.rate > 0.0)) throw std::invalid_argument("rost: t and rate must be positive");
  if (!(cfg.halfwidth > 0.0)) throw std::invalid_argument("rost: halfwidth must be positive");
  if (cfg.x_grid.empty()) throw std::invalid_argument("rost: empty x grid");
  // Scaled coordinate x refers to site x * rate * t.
  const double scale = cfg.rate * cfg.t;
  const double leftmost = std::min(0.0, *std::min_element(cfg.x_grid.begin(), cfg.x_grid.end()) - cfg.halfwidth);
  const auto n = static_cast<std::int64_t>(std::ceil(-leftmost * scale)) + 16;
  const double rate = cfg.rate;

  auto dens = run_replicas<std::vector<double>>(cfg.replicas, cfg.jobs, [&](std::int64_t r) {
    const Seed rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto pos = jam_positions([rate](Label) { return rate; }, rs, cfg.t, n);
    std::vector<double> out;
    for (double x : cfg.x_grid) {
      const double lo = std::ceil((x - cfg.halfwidth) * scale);
      const double hi = std::floor((x + cfg.halfwidth) * scale);
      std::int64_t count = 0;
      for (Position p : pos) {
        const auto pd = static_cast<double>(p);
        if (pd >= lo && pd <= hi) ++count;
      }
      out.push_back(static_cast<double>(count) / (hi - lo + 1.0));
    }
    return out;
  });

  std::vector<RostBin> bins;
  for (std::size_t b = 0; b < cfg.x_grid.size(); ++b) {
    std::vector<double> v;
    for (const auto& row : dens) v.push_back(row[b]);
    RostBin bin;
    bin.x = cfg.x_grid[b];
    bin.density = stats::mean(v);
    bin.std_error = std::sqrt(stats::variance(v) / static_cast<double>(v.size()));
    bin.profile = rost_profile_value(bin.x);
    constexpr int kSteps = 2000;
    double acc = 0.0;
    for (int s = 0; s < kSteps; ++s) {
      acc += rost_profile_value(bin.x - cfg.halfwidth + (s + 0.5) * 2.0 * cfg.halfwidth / kSteps);
    }
    bin.profile_bin = acc / kSteps;
    bins.push_back(bin);
  }
  return bins;
}

std::vector<GlynnWhittRow> glynn_whitt_benchmark(const GlynnWhittConfig& cfg) {
  check_common(cfg.replicas, cfg.horizons);
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw std::invalid_argument("glynnwhitt: gamma must lie in (0,1)");
  if (!(cfg.a >= 0.0) || !(cfg.rate > 0.0)) throw std::invalid_argument("glynnwhitt: need a >= 0 and rate > 0");
  std::vector<GlynnWhittRow> rows;
  const double rate = cfg.rate;
  for (double t : cfg.horizons) {
    GlynnWhittRow row;
    row.t = t;
    row.depth = static_cast<std::int64_t>(std::floor(std::pow(t, cfg.gamma) * cfg.a));
    row.limit = -2.0 * std::sqrt(cfg.a);
    const double norm = std::pow(rate * t, (1.0 + cfg.gamma) / 2.0);
    const double h[] = {t};
    auto values = run_replicas<double>(cfg.replicas, cfg.jobs, [&](std::int64_t r) {
      const Seed rs = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
      const auto pos = jam_label_position([rate](Label) { return rate; }, rs, row.depth, h);
      return (static_cast<double>(pos[0]) - rate * t) / norm;
    });
    row.mean = stats::mean(values);
    row.sd = std::sqrt(stats::variance(values));
    row.std_error = row.sd / std::sqrt(static_cast<double>(values.size()));
    rows.push_back(row);
  }
  return rows;
}

// ---- CSV ----

void write_tail_csv(std::ostream& os, const TailCurve& curve) {
  CsvPrecision guard(os);
  os << "param,empirical,ci_lo,ci_hi,bound_lower,bound_upper\n";
  for (const TailPoint& p : curve.points) {
    os << p.param << ',' << p.empirical << ',' << p.ci_lo << ',' << p.ci_hi << ',' << p.bound_lower << ','
       << p.bound_upper << '\n';
  }
}

void write_scaling_csv(std::ostream& os, const ScalingFit& fit) {
  CsvPrecision guard(os);
  os << "t,statistic,slope,slope_se\n";
  for (std::size_t i = 0; i < fit.t.size(); ++i) {
    os << fit.t[i] << ',' << fit.statistic[i] << ',' << fit.slope << ',' << fit.slope_se << '\n';
  }
}

void write_samples_csv(std::ostream& os, const std::vector<double>& horizons,
                       const std::vector<std::vector<std::int64_t>>& samples, const std::string& column) {
  CsvPrecision guard(os);
  os << "t,replica," << column << '\n';
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    for (std::size_t r = 0; r < samples[h].size(); ++r) os << horizons[h] << ',' << r << ',' << samples[h][r] << '\n';
  }
}

void write_lemma1_csv(std::ostream& os, const std::vector<Lemma1Point>& points) {
  CsvPrecision guard(os);
  os << "q1,q2,N,scan_length,threshold,replicas,hits,empirical,std_error,exact,limit\n";
  for (const Lemma1Point& p : points) {
    const ScanEstimate& e = p.estimate;
    os << p.q1 << ',' << p.q2 << ',' << p.n << ',' << e.scan_length << ',' << e.threshold << ',' << e.replicas << ','
       << e.hits << ',';
    if (p.sampled) {
      os << e.empirical << ',' << e.std_error;
    } else {
      os << ',';
    }
    os << ',' << e.exact << ',' << e.limit << '\n';
  }
}

void write_window_csv(std::ostream& os, const std::vector<WindowCell>& cells) {
  CsvPrecision guard(os);
  os << "t,a,b,frequency,ci_lo,ci_hi\n";
  for (const WindowCell& c : cells) {
    os << c.t << ',' << c.a << ',' << c.b << ',' << c.frequency << ',' << c.ci.lo << ',' << c.ci.hi << '\n';
  }
}

void write_rost_csv(std::ostream& os, const std::vector<RostBin>& bins) {
  CsvPrecision guard(os);
  os << "x,density,std_error,profile,profile_bin\n";
  for (const RostBin& b : bins) {
    os << b.x << ',' << b.density << ',' << b.std_error << ',' << b.profile << ',' << b.profile_bin << '\n';
  }
}

void write_glynn_whitt_csv(std::ostream& os, const std::vector<GlynnWhittRow>& rows) {
  CsvPrecision guard(os);
  os << "t,depth,mean,sd,std_error,limit\n";
  for (const GlynnWhittRow& r : rows) {
    os << r.t << ',' << r.depth << ',' << r.mean << ',' << r.sd << ',' << r.std_error << ',' << r.limit << '\n';
  }
}

void write_burke_csv(std::ostream& os, const BurkeResult& r) {
  CsvPrecision guard(os);
  os << "gap,observed,expected\n";
  const auto n = static_cast<double>(r.tagged_gap.size());
  for (std::size_t k = 0; k < r.gap_bins.size(); ++k) {
    os << k << (k + 1 == r.gap_bins.size() ? "+" : "") << ',' << r.gap_bins[k] << ',' << n * r.gap_probs[k] << '\n';
  }
}

// ---- Coupling monotonicity ----

CouplingReport coupling_check(const CouplingConfig& cfg) {
  if (cfg.trials < 1 || cfg.max_particles < 2 || !(cfg.t_max > 0.0) || !(cfg.gap_mean > 0.0)) {
    throw std::invalid_argument("coupling_check: need trials >= 1, max_particles >= 2, t_max > 0, gap_mean > 0");
  }
  if (!(cfg.floor_fraction > 0.0 && cfg.floor_fraction <= 1.0)) {
    throw std::invalid_argument("coupling_check: floor_fraction must lie in (0, 1]");
  }
  const IIDGapSpec base{cfg.gap_mean, GapFamily::geometric, std::nullopt};
  const IIDGapSpec extra{1.0, GapFamily::geometric, std::nullopt};
  const double floor = cfg.law.c() + cfg.floor_fraction * cfg.law.eps();
  CouplingReport report;
  report.trials = cfg.trials;
  for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
    const Seed ts = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const auto n = 2 + static_cast<std::int64_t>(counter_uniform(ts, Stream::replica, 1) *
                                                 static_cast<double>(cfg.max_particles - 1));
    const Label top = std::min(n, cfg.max_particles) - 1;
    const double t = cfg.t_max * counter_uniform(ts, Stream::replica, 2);
    const DisorderField field = sample_rates(cfg.law, {0, top}, ts);

    const GapConfig low = sample_iid_gaps(base, {0, top - 1}, ts);
    const GapConfig add = sample_iid_gaps(extra, {0, top - 1}, derive_seed(ts, 1));
    std::vector<std::int64_t> high(low.gaps().begin(), low.gaps().end());
    for (std::size_t i = 0; i < high.size(); ++i) high[i] += add.gaps()[i];

    {
      const ClockSchedule clocks = ClockSchedule::from_field(field, ts);
      SimulationRun a(gaps_to_particles(low), clocks);
      SimulationRun b(gaps_to_particles(GapConfig(low.anchor(), high)), clocks);
      SimulationRun* runs[] = {&a, &b};
      bool ok = true;
      coupled_run(runs, t, [&](std::span<SimulationRun* const>) {
        ++report.events;
        for (Label i = 0; i < top && ok; ++i) {
          ok = a.position(i + 1) - a.position(i) <= b.position(i + 1) - b.position(i);
        }
      });
      report.basic_violations += ok ? 0 : 1;
    }
    {
      const ClockSchedule clocks = ClockSchedule::fastened(field, floor, ts);
      const ParticleConfig start = gaps_to_particles(low);
      SimulationRun fast(start, clocks);
      RunOptions thinned;
      thinned.view = ClockView::thinned;
      SimulationRun slow(start, clocks, thinned);
      SimulationRun* runs[] = {&fast, &slow};
      bool ok = true;
      coupled_run(runs, t, [&](std::span<SimulationRun* const>) {
        ++report.events;
        for (Label i = 0; i <= top && ok; ++i) ok = fast.position(i) >= slow.position(i);
      });
      report.fastened_violations += ok ? 0 : 1;
    }
  }
  return report;
}

}  // namespace rtasep
