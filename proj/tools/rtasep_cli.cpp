// rtasep: command-line harness for the random-rate exclusion simulations.
//
// Exit codes: 0 ok, 2 configuration or hypothesis error, 3 failed --assert
// check, 4 window audit failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtasep/config.hpp"
#include "rtasep/disorder.hpp"
#include "rtasep/engine.hpp"
#include "rtasep/experiments.hpp"
#include "rtasep/measures.hpp"
#include "rtasep/variational.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rtasep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssert = 3;
constexpr int kExitWindow = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out_dir;
  bool check = false;
  bool dry_run = false;
};

struct Outcome {
  json summary = json::object();
  json checks = json::object();
  bool window_failed = false;
};

class OutputDir {
 public:
  OutputDir(fs::path dir, bool as_json) : dir_(std::move(dir)), as_json_(as_json) {}

  void table(const std::string& stem, const std::function<void(std::ostream&)>& write) {
    std::ostringstream csv;
    write(csv);
    if (as_json_) {
      emit(stem + ".json", csv_to_json(csv.str()).dump(2) + "\n");
    } else {
      emit(stem + ".csv", csv.str());
    }
  }

  void raw(const std::string& name, const std::string& content) { emit(name, content); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  static json cell(const std::string& s) {
    if (s.empty()) return nullptr;
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    return s;
  }

  static json csv_to_json(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    json rows = json::array();
    while (std::getline(in, line)) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (!line.empty() && line.back() == ',') fields.emplace_back();
      if (header.empty()) {
        header = fields;
        continue;
      }
      json row = json::object();
      for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cell(i < fields.size() ? fields[i] : "");
      rows.push_back(std::move(row));
    }
    return rows;
  }

  void emit(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    files_.push_back(name);
  }

  fs::path dir_;
  bool as_json_;
  std::vector<std::string> files_;
};

json law_json(const RateLaw& law) {
  const DerivedConstants k = law.constants();
  json j;
  j["c"] = law.c();
  j["nu"] = law.nu();
  j["kappa"] = law.kappa();
  j["eps"] = law.eps();
  j["top_mass"] = law.top_mass();
  j["alpha"] = k.alpha;
  j["a_nu"] = k.a_nu;
  j["u_star"] = k.u_star.is_finite() ? json(k.u_star.value()) : json("infinite");
  j["rho_star"] = k.rho_star;
  return j;
}

std::string horizon_tag(double t) {
  std::ostringstream s;
  s << std::setprecision(12) << t;
  return s.str();
}

// ---- simulate ----

Outcome run_simulate(const ResolvedConfig& cfg, Seed seed, OutputDir& out, std::ostream* plan) {
  const RateLaw law = cfg.law();
  const std::string mode = cfg.text("experiment", "mode");
  const double t = cfg.number("experiment", "t");
  const double K = cfg.number("experiment", "K");
  const std::int64_t margin = cfg.integer("experiment", "margin");
  if (!(t >= 0.0)) throw ConfigError("experiment.t must be nonnegative");
  std::vector<double> snaps = cfg.numbers("experiment", "snapshots");
  for (double s : snaps) {
    if (s < 0.0 || s > t) throw ConfigError("experiment.snapshots must lie in [0, t]");
  }
  std::sort(snaps.begin(), snaps.end());

  LabelRange window;
  std::optional<DisorderField> field;
  ParticleConfig initial;
  std::vector<double> rates;
  if (mode == "tagged") {
    window = choose_window(t, K, WindowMode::tagged);
    IIDGapSpec spec{cfg.number("experiment", "u"), parse_gap_family(cfg.text("experiment", "gap_family")),
                    std::nullopt};
    if (!cfg.text("experiment", "two_point_upper").empty()) {
      spec.two_point_upper = cfg.integer("experiment", "two_point_upper");
    }
    spec.validate();
    if (!plan) {
      field = sample_rates(law, window, seed);
      initial = gaps_to_particles(sample_iid_gaps(spec, {window.lo, window.hi - 1}, seed));
    }
  } else if (mode == "jam") {
    window = choose_window(t, K, WindowMode::jam, law.c(), margin);
    if (!plan) {
      field = sample_rates(law, window, seed);
      initial = jam_initial(window.size());
    }
  } else if (mode == "equilibrium") {
    const std::int64_t labels = cfg.integer("experiment", "labels");
    const double a = cfg.number("experiment", "a");
    if (labels < 1) throw ConfigError("experiment.labels must be >= 1");
    if (!(a > 0.0 && a < law.c())) throw HypothesisError("equilibrium mode requires 0 < a < c");
    window = {0, labels};
    if (!plan) {
      field = sample_rates(law, {0, labels - 1}, seed);
      initial = gaps_to_particles(sample_equilibrium_gaps(*field, {a, std::nullopt}, {0, labels - 1}, seed));
    }
  } else {
    throw ConfigError("experiment.mode must be tagged, jam or equilibrium");
  }
  if (plan) {
    *plan << "backend: event-driven graphical construction\n"
          << "labels: [" << window.lo << ", " << window.hi << "] (" << window.size() << ")\n"
          << "snapshots: " << snaps.size() << "\n"
          << "memory estimate: " << window.size() * 72 / 1024 + 1 << " KiB\n";
    return {};
  }
  if (mode == "equilibrium") {
    const auto r = field->rates();
    rates.assign(r.begin(), r.end());
    rates.push_back(cfg.number("experiment", "a"));
  } else {
    const auto r = field->rates();
    rates.assign(r.begin(), r.end());
  }
  const ClockSchedule clocks(seed, window, rates);
  RunOptions opts;
  opts.record_events = cfg.flag("experiment", "record_events");
  SimulationRun run(initial, clocks, opts);
  std::ostringstream snapshots;
  snapshots.precision(12);
  bool header = true;
  for (double s : snaps) {
    run.add_observer(s, [&](const SimulationRun& r, double when) {
      write_snapshot_csv(snapshots, r.snapshot(), when, header);
      header = false;
    });
  }
  run.run(t);

  out.table("snapshots", [&](std::ostream& os) {
    if (header) os << "time,label,position,gap,height\n";
    os << snapshots.str();
  });
  out.table("rates", [&](std::ostream& os) {
    os << "index,rate\n";
    os.precision(17);
    for (Label i = window.lo; i <= window.hi; ++i) os << i << ',' << clocks.base_rate(i) << '\n';
  });
  if (opts.record_events) {
    out.table("events", [&](std::ostream& os) {
      os << "label,time,executed\n";
      os.precision(17);
      for (const EventRecord& e : run.event_log()) os << e.label << ',' << e.time << ',' << (e.executed ? 1 : 0) << '\n';
    });
  }
  Outcome o;
  o.summary["mode"] = mode;
  o.summary["labels"] = {window.lo, window.hi};
  o.summary["attempts"] = run.total_attempts();
  o.summary["jumps"] = run.total_jumps();
  const Label tagged = mode == "jam" ? 0 : window.lo;
  o.summary["tagged_label"] = tagged;
  o.summary["tagged_displacement"] = run.position(tagged) - initial.position(tagged);
  if (mode == "jam") o.summary["front_count"] = front_count(run.snapshot(), t, law.c());
  return o;
}

// ---- lemma1 ----

Outcome run_lemma1(const ResolvedConfig& cfg, Seed seed, OutputDir& out, std::ostream* plan) {
  Lemma1Config c;
  c.law = cfg.law();
  c.q1 = cfg.numbers("experiment", "q1");
  c.q2 = cfg.numbers("experiment", "q2");
  c.n_grid = cfg.numbers("experiment", "N");
  c.replicas = cfg.integer("experiment", "replicas");
  c.mc_max_n = cfg.number("experiment", "mc_max_n");
  c.seed = seed;
  if (c.replicas < 1) throw ConfigError("experiment.replicas must be >= 1");
  for (double q : c.q1) if (q < 0.0) throw ConfigError("experiment.q1 must be nonnegative");
  for (double q : c.q2) if (q < 0.0) throw ConfigError("experiment.q2 must be nonnegative");
  for (double n : c.n_grid) if (!(n > 0.0)) throw ConfigError("experiment.N must be positive");
  if (plan) {
    *plan << "backend: rate scans only (no dynamics)\n"
          << "grid points: " << c.q1.size() * c.q2.size() * c.n_grid.size() << "\n"
          << "Monte Carlo replicas per point with N <= " << c.mc_max_n << ": " << c.replicas << "\n"
          << "memory estimate: < 1 MiB\n";
    return {};
  }
  const auto points = lemma1_curve(c);
  out.table("lemma1", [&](std::ostream& os) { write_lemma1_csv(os, points); });

  Outcome o;
  const double tol = cfg.number("experiment", "limit_tolerance");
  const double max_z = cfg.number("experiment", "max_z");
  bool mc_ok = true;
  double worst_z = 0.0;
  json rows = json::array();
  double largest_n = 0.0;
  bool limit_ok = true;
  for (const Lemma1Point& p : points) largest_n = std::max(largest_n, p.n);
  for (const Lemma1Point& p : points) {
    json r;
    r["q1"] = p.q1;
    r["q2"] = p.q2;
    r["N"] = p.n;
    r["exact"] = p.estimate.exact;
    r["limit"] = p.estimate.limit;
    if (p.sampled) {
      r["empirical"] = p.estimate.empirical;
      r["z"] = p.z_score();
      worst_z = std::max(worst_z, std::abs(p.z_score()));
      mc_ok = mc_ok && std::abs(p.z_score()) <= max_z;
    }
    if (p.n == largest_n) limit_ok = limit_ok && std::abs(p.estimate.exact - p.estimate.limit) <= tol;
    rows.push_back(std::move(r));
  }
  o.summary["points"] = std::move(rows);
  o.summary["worst_abs_z"] = worst_z;
  o.checks["monte_carlo_within_max_z"] = mc_ok;
  o.checks["exact_near_limit_at_largest_N"] = limit_ok;
  return o;
}

// ---- theorems ----

IIDGapSpec gap_spec_from(const ResolvedConfig& cfg) {
  IIDGapSpec spec{cfg.number("experiment", "u"), parse_gap_family(cfg.text("experiment", "gap_family")), std::nullopt};
  if (!cfg.text("experiment", "two_point_upper").empty()) {
    spec.two_point_upper = cfg.integer("experiment", "two_point_upper");
  }
  return spec;
}

void write_tails(OutputDir& out, const std::vector<TailCurve>& tails) {
  for (const TailCurve& c : tails) {
    out.table("tail_t" + horizon_tag(c.t), [&](std::ostream& os) { write_tail_csv(os, c); });
  }
}

json fit_json(const ScalingFit& f) {
  json j;
  j["t"] = f.t;
  j["statistic"] = f.statistic;
  j["slope"] = f.valid ? json(f.slope) : json(nullptr);
  j["slope_se"] = f.valid ? json(f.slope_se) : json(nullptr);
  return j;
}

const TailPoint* find_point(const TailCurve& c, double param) {
  for (const TailPoint& p : c.points) {
    if (std::abs(p.param - param) < 1e-12) return &p;
  }
  return nullptr;
}

Outcome run_thm1(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  Theorem1Config c;
  c.law = cfg.law();
  c.gaps = gap_spec_from(cfg);
  c.horizons = cfg.numbers("experiment", "t");
  c.z_grid = cfg.numbers("experiment", "z");
  c.replicas = cfg.integer("experiment", "replicas");
  c.seed = seed;
  c.jobs = jobs;
  validate(c);
  const double z_check = cfg.number("experiment", "z_check");
  if (!std::count(c.z_grid.begin(), c.z_grid.end(), z_check)) throw ConfigError("experiment.z_check must be in z");
  if (plan) {
    const double t = *std::max_element(c.horizons.begin(), c.horizons.end());
    const double budget = c.law.c() * t + 3.0 * std::pow(t, c.law.constants().one_minus_alpha) + 8.0 * std::sqrt(t);
    *plan << "backend: departure-time recursion (no label window)\n"
          << "replicas: " << c.replicas << " per horizon, horizons evaluated in one pass\n"
          << "labels per replica at t = " << t << ": about " << static_cast<std::int64_t>(budget / c.gaps.mean) << "\n"
          << "memory estimate: " << static_cast<std::int64_t>(4.0 * 8.0 * budget * jobs / 1024.0) + 1 << " KiB\n";
    return {};
  }
  const Theorem1Result r = theorem1(c);
  out.table("displacement", [&](std::ostream& os) { write_samples_csv(os, c.horizons, r.displacement, "displacement"); });
  write_tails(out, r.tails);
  out.table("scaling", [&](std::ostream& os) { write_scaling_csv(os, r.fit); });

  Outcome o;
  o.summary["u_star"] = r.u_star;
  o.summary["fit"] = fit_json(r.fit);
  const double lo = r.bounds.lower(z_check);
  const double hi = r.bounds.upper(z_check);
  std::vector<TailPoint> at_z;
  for (const TailCurve& tc : r.tails) at_z.push_back(*find_point(tc, z_check));
  const TrendCheck trend = trend_toward(at_z, lo, hi);
  json tail = json::array();
  for (const TailPoint& p : at_z) tail.push_back({p.empirical, p.ci_lo, p.ci_hi});
  o.summary["tail_at_z_check"] = tail;
  o.summary["bracket_at_z_check"] = {lo, hi};
  o.summary["trend_distance"] = trend.distance;
  o.checks["slope_in_range"] = r.fit.valid && r.fit.slope >= cfg.number("experiment", "slope_lo") &&
                               r.fit.slope <= cfg.number("experiment", "slope_hi");
  o.checks["tail_trend_toward_bracket"] = trend.passed;
  o.checks["tail_within_loose_bracket_at_largest_t"] =
      at_z.back().empirical >= 0.5 * lo && at_z.back().empirical <= 2.0 * hi;
  return o;
}

FrontConfig front_config(const ResolvedConfig& cfg, Seed seed, int jobs) {
  FrontConfig c;
  c.law = cfg.law();
  c.horizons = cfg.numbers("experiment", "t");
  c.replicas = cfg.integer("experiment", "replicas");
  c.seed = seed;
  c.jobs = jobs;
  if (c.replicas < 1) throw ConfigError("experiment.replicas must be >= 1");
  for (double t : c.horizons) {
    if (!(t > 0.0)) throw ConfigError("experiment.t values must be positive");
  }
  return c;
}

void front_plan(std::ostream& plan, const FrontConfig& c, int jobs) {
  const double t = *std::max_element(c.horizons.begin(), c.horizons.end());
  plan << "backend: departure-time recursion from the jam (labels added until none is beyond ct)\n"
       << "replicas: " << c.replicas << ", horizons evaluated in one pass\n"
       << "memory estimate: " << static_cast<std::int64_t>(2.0 * 8.0 * t * jobs / 1024.0) + 1 << " KiB\n";
}

Outcome run_thm2(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  const FrontConfig c = front_config(cfg, seed, jobs);
  validate_theorem2(c.law);
  const std::vector<double> b = cfg.numbers("experiment", "b");
  const double b_check = cfg.number("experiment", "b_check");
  if (!std::count(b.begin(), b.end(), b_check)) throw ConfigError("experiment.b_check must be in b");
  if (plan) {
    front_plan(*plan, c, jobs);
    return {};
  }
  const Theorem2Result r = theorem2(c, b);
  out.table("front_count", [&](std::ostream& os) { write_samples_csv(os, c.horizons, r.counts, "front_count"); });
  write_tails(out, r.tails);
  out.table("scaling", [&](std::ostream& os) { write_scaling_csv(os, r.fit); });
  Outcome o;
  o.summary["fit"] = fit_json(r.fit);
  const TailPoint& p = *find_point(r.tails.back(), b_check);
  o.summary["tail_at_b_check"] = {p.empirical, p.ci_lo, p.ci_hi};
  o.summary["bracket_at_b_check"] = {p.bound_lower, p.bound_upper};
  o.checks["slope_in_range"] = r.fit.valid && r.fit.slope >= cfg.number("experiment", "slope_lo") &&
                               r.fit.slope <= cfg.number("experiment", "slope_hi");
  o.checks["tail_below_twice_upper_at_largest_t"] = p.empirical < 2.0 * p.bound_upper;
  return o;
}

Outcome run_thm3(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  const FrontConfig c = front_config(cfg, seed, jobs);
  validate_theorem3(c.law);
  const auto a = cfg.numbers("experiment", "a");
  const auto b = cfg.numbers("experiment", "b");
  const double a_check = cfg.number("experiment", "a_check");
  const double b_check = cfg.number("experiment", "b_check");
  if (!std::count(a.begin(), a.end(), a_check) || !std::count(b.begin(), b.end(), b_check)) {
    throw ConfigError("experiment.a_check and experiment.b_check must be grid values");
  }
  if (plan) {
    front_plan(*plan, c, jobs);
    return {};
  }
  const Theorem3Result r = theorem3(c, a, b);
  out.table("front_count", [&](std::ostream& os) { write_samples_csv(os, c.horizons, r.counts, "front_count"); });
  out.table("window", [&](std::ostream& os) { write_window_csv(os, r.cells); });
  Outcome o;
  o.summary["median_x_over_sqrt_t"] = r.median_scaled;
  bool ok = true;
  json freq = json::array();
  for (const WindowCell& cell : r.cells) {
    if (cell.a == a_check && cell.b == b_check) {
      freq.push_back(cell.frequency);
      ok = ok && cell.frequency >= cfg.number("experiment", "min_frequency");
    }
  }
  o.summary["frequency_at_check_cell"] = freq;
  o.checks["window_frequency"] = ok;
  return o;
}

Outcome run_thm4(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  const FrontConfig c = front_config(cfg, seed, jobs);
  validate_theorem4(c.law);
  if (plan) {
    front_plan(*plan, c, jobs);
    return {};
  }
  const Theorem4Result r = theorem4(c, cfg.number("experiment", "margin"));
  out.table("front_count", [&](std::ostream& os) { write_samples_csv(os, c.horizons, r.counts, "front_count"); });
  out.table("scaling", [&](std::ostream& os) { write_scaling_csv(os, r.fit); });
  Outcome o;
  o.summary["fit"] = fit_json(r.fit);
  o.summary["exponent_bracket"] = {r.lower_exponent, r.upper_exponent};
  o.summary["margin"] = r.margin;
  o.checks["slope_in_bracket"] = r.in_bracket();
  return o;
}

// ---- burke ----

Outcome run_burke(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  BurkeConfig c;
  c.law = cfg.law();
  c.a = cfg.number("experiment", "a");
  c.t = cfg.number("experiment", "t");
  c.replicas = cfg.integer("experiment", "replicas");
  c.field_labels = cfg.integer("experiment", "field_labels");
  c.window = cfg.integer("experiment", "window");
  c.intervals_per_replica = cfg.integer("experiment", "intervals");
  c.seed = seed;
  c.jobs = jobs;
  validate(c);
  if (plan) {
    *plan << "backend: event-driven graphical construction\n"
          << "quenched field: labels [0, " << c.field_labels - 1 << "]\n"
          << "dynamic window: labels [0, " << c.window << "] plus a rate-a driver at " << c.window + 1 << "\n"
          << "replicas: " << c.replicas << "\n"
          << "memory estimate: " << (c.field_labels * 8 + (c.window + 2) * 72 * jobs) / 1024 + 1 << " KiB\n";
    return {};
  }
  const BurkeResult r = burke_check(c);
  out.table("gap_marginal", [&](std::ostream& os) { write_burke_csv(os, r); });
  out.table("increments", [&](std::ostream& os) {
    os << "replica,increment,gap0\n";
    for (std::size_t i = 0; i < r.increments.size(); ++i) {
      os << i << ',' << static_cast<std::int64_t>(r.increments[i]) << ',' << r.tagged_gap[i] << '\n';
    }
  });
  Outcome o;
  o.summary["p0"] = r.p0;
  o.summary["expected_mean"] = r.expected_mean;
  o.summary["mean"] = r.mean;
  o.summary["std_error"] = r.std_error;
  o.summary["variance"] = r.variance;
  o.summary["dispersion"] = r.dispersion;
  o.summary["gap_chi2"] = {{"statistic", r.gap_chi2.statistic}, {"dof", r.gap_chi2.dof}, {"p", r.gap_chi2.p_value}};
  o.summary["interjump_ks"] = {{"D", r.interjump_ks.statistic},
                               {"p", r.interjump_ks.p_value},
                               {"samples", r.interjump_samples}};
  const double level = cfg.number("experiment", "level");
  o.checks["mean_within_max_z"] =
      std::abs(r.mean - r.expected_mean) <= cfg.number("experiment", "max_z") * r.std_error;
  o.checks["dispersion_in_range"] =
      r.dispersion >= cfg.number("experiment", "dispersion_lo") && r.dispersion <= cfg.number("experiment", "dispersion_hi");
  o.checks["gap_chi2_passes"] = r.gap_chi2.p_value >= level;
  o.checks["interjump_ks_passes"] = r.interjump_ks.p_value >= level;
  return o;
}

// ---- varcheck ----

Outcome run_varcheck(const ResolvedConfig& cfg, Seed seed, OutputDir& out, std::ostream* plan) {
  const RateLaw law = cfg.law();
  VarcheckOptions v;
  v.trials = cfg.integer("experiment", "trials");
  v.max_particles = cfg.integer("experiment", "max_particles");
  v.t_max = cfg.number("experiment", "t_max");
  v.K = cfg.number("experiment", "K");
  v.gap_mean = cfg.number("experiment", "gap_mean");
  if (v.trials < 1 || v.max_particles < 2 || !(v.t_max > 0.0) || !(v.K > 1.0) || !(v.gap_mean > 0.0)) {
    throw ConfigError("varcheck: need trials >= 1, max_particles >= 2, t_max > 0, K > 1, gap_mean > 0");
  }
  if (plan) {
    *plan << "backend: event-driven graphical construction, shared clocks\n"
          << "trials: " << v.trials << ", particles 2.." << v.max_particles << ", t in (0, " << v.t_max << "]\n"
          << "corner window: min(top label, ceil(" << v.K << " t))\n"
          << "memory estimate: " << v.max_particles * v.max_particles * 16 / 1024 + 1 << " KiB\n";
    return {};
  }
  const VarcheckReport r = varcheck(law, v, seed);
  std::ostringstream js;
  write_varcheck_json(js, r);
  out.raw("varcheck_audit.json", js.str());
  out.table("varcheck", [&](std::ostream& os) {
    os.precision(12);
    os << "trial,particles,t,window,widened,direct,svar1,svar2,svar4,audit_passed,match\n";
    for (const VarcheckTrial& t : r.trials) {
      os << t.trial << ',' << t.particles << ',' << t.t << ',' << t.window << ',' << (t.widened ? 1 : 0) << ','
         << t.direct << ',' << t.svar1 << ','
         << t.svar2 << ',' << t.svar4 << ',' << (t.audit_passed ? 1 : 0) << ',' << (t.match ? 1 : 0) << '\n';
    }
  });
  Outcome o;
  o.summary["trials"] = v.trials;
  o.summary["svar1_mismatches"] = r.svar1_mismatches;
  o.summary["svar2_mismatches"] = r.svar2_mismatches;
  o.summary["svar4_mismatches"] = r.svar4_mismatches;
  o.summary["sweep_mismatches"] = r.sweep_mismatches;
  o.summary["widened_windows"] = r.widened;
  o.summary["audit_failures"] = r.audit_failures;
  o.checks["all_match"] = r.all_match();
  o.window_failed = r.audit_failures > 0;
  return o;
}

// ---- calibration ----

Outcome run_rost(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  RostConfig c;
  c.rate = cfg.number("experiment", "rate");
  c.t = cfg.number("experiment", "t");
  c.replicas = cfg.integer("experiment", "replicas");
  c.x_grid = cfg.numbers("experiment", "x");
  c.halfwidth = cfg.number("experiment", "halfwidth");
  c.seed = seed;
  c.jobs = jobs;
  if (!(c.rate > 0.0) || !(c.t > 0.0) || c.replicas < 1 || !(c.halfwidth > 0.0)) {
    throw ConfigError("rost: need rate > 0, t > 0, replicas >= 1, halfwidth > 0");
  }
  if (plan) {
    const double left = std::min(0.0, *std::min_element(c.x_grid.begin(), c.x_grid.end()) - c.halfwidth);
    const auto n = static_cast<std::int64_t>(std::ceil(-left * c.rate * c.t)) + 16;
    *plan << "backend: departure-time recursion from the jam, constant rate " << c.rate << "\n"
          << "labels per replica: " << n << "\nreplicas: " << c.replicas << "\n"
          << "memory estimate: " << (n * 8 + static_cast<std::int64_t>(16.0 * c.rate * c.t)) * jobs / 1024 + 1
          << " KiB\n";
    return {};
  }
  const auto bins = rost_profile(c);
  out.table("rost", [&](std::ostream& os) { write_rost_csv(os, bins); });
  Outcome o;
  const double tol = cfg.number("experiment", "tolerance");
  json rows = json::array();
  bool ok = true;
  for (const RostBin& b : bins) {
    rows.push_back({{"x", b.x}, {"density", b.density}, {"profile", b.profile}});
    if (b.x == 0.0) ok = ok && std::abs(b.density - 0.5) <= tol;
    if (b.x <= -1.0 - c.halfwidth) ok = ok && b.density >= 1.0 - tol;
    if (b.x >= 1.0 + c.halfwidth) ok = ok && b.density <= tol;
  }
  o.summary["bins"] = std::move(rows);
  o.checks["profile_matches"] = ok;
  return o;
}

Outcome run_glynnwhitt(const ResolvedConfig& cfg, Seed seed, int jobs, OutputDir& out, std::ostream* plan) {
  GlynnWhittConfig c;
  c.rate = cfg.number("experiment", "rate");
  c.a = cfg.number("experiment", "a");
  c.gamma = cfg.number("experiment", "gamma");
  c.horizons = cfg.numbers("experiment", "t");
  c.replicas = cfg.integer("experiment", "replicas");
  c.seed = seed;
  c.jobs = jobs;
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("experiment.gamma must lie in (0,1)");
  if (!(c.rate > 0.0) || c.a < 0.0 || c.replicas < 2) throw ConfigError("glynnwhitt: need rate > 0, a >= 0, replicas >= 2");
  if (plan) {
    const double t = *std::max_element(c.horizons.begin(), c.horizons.end());
    *plan << "backend: departure-time recursion from the jam, constant rate " << c.rate << "\n"
          << "deepest label at t = " << t << ": " << std::floor(std::pow(t, c.gamma) * c.a) << "\n"
          << "replicas: " << c.replicas << "\n"
          << "memory estimate: " << static_cast<std::int64_t>(16.0 * c.rate * t * jobs / 1024.0) + 1 << " KiB\n";
    return {};
  }
  const auto rows = glynn_whitt_benchmark(c);
  out.table("glynnwhitt", [&](std::ostream& os) { write_glynn_whitt_csv(os, rows); });
  Outcome o;
  json j = json::array();
  bool trend = true;
  int inversions = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    j.push_back({{"t", rows[i].t}, {"mean", rows[i].mean}, {"std_error", rows[i].std_error}});
    if (i > 0) {
      const double prev = std::abs(rows[i - 1].mean - rows[i - 1].limit);
      const double cur = std::abs(rows[i].mean - rows[i].limit);
      if (cur > prev) {
        ++inversions;
        if (cur - prev > 2.0 * (rows[i].std_error + rows[i - 1].std_error)) trend = false;
      }
    }
  }
  o.summary["rows"] = std::move(j);
  o.summary["limit"] = rows.empty() ? 0.0 : rows.front().limit;
  o.checks["trend_toward_limit"] = trend && inversions <= 1;
  return o;
}

int execute(const std::string& command, const Options& opt) {
  std::optional<ConfigFile> file;
  if (!opt.config_path.empty()) file = ConfigFile::load(opt.config_path);
  ResolvedConfig cfg(command, file ? &*file : nullptr);
  if (opt.seed) cfg.set("run", "seed", std::to_string(*opt.seed));
  if (opt.jobs) cfg.set("run", "jobs", std::to_string(*opt.jobs));
  const double seed_value = cfg.number("run", "seed");
  if (seed_value < 0 || seed_value != std::floor(seed_value)) throw ConfigError("run.seed must be a nonnegative integer");
  const Seed seed = std::stoull(cfg.text("run", "seed"));
  const auto jobs = static_cast<int>(cfg.integer("run", "jobs"));
  if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
  const std::string format = cfg.text("run", "format");
  if (format != "csv" && format != "json") throw ConfigError("run.format must be csv or json");
  if (cfg.has_law()) (void)cfg.law();

  const fs::path out_dir = opt.out_dir.empty() ? fs::path("out") / command : fs::path(opt.out_dir);
  OutputDir out(out_dir, format == "json");
  std::ostream* plan = opt.dry_run ? &std::cout : nullptr;
  if (plan) {
    std::cout << "command: " << command << "\nseed: " << seed << "\njobs: " << jobs << "\noutput: " << out_dir.string()
              << "\n";
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  if (command == "simulate") o = run_simulate(cfg, seed, out, plan);
  else if (command == "lemma1") o = run_lemma1(cfg, seed, out, plan);
  else if (command == "thm1") o = run_thm1(cfg, seed, jobs, out, plan);
  else if (command == "thm2") o = run_thm2(cfg, seed, jobs, out, plan);
  else if (command == "thm3") o = run_thm3(cfg, seed, jobs, out, plan);
  else if (command == "thm4") o = run_thm4(cfg, seed, jobs, out, plan);
  else if (command == "burke") o = run_burke(cfg, seed, jobs, out, plan);
  else if (command == "varcheck") o = run_varcheck(cfg, seed, out, plan);
  else if (command == "rost") o = run_rost(cfg, seed, jobs, out, plan);
  else if (command == "glynnwhitt") o = run_glynnwhitt(cfg, seed, jobs, out, plan);
  else throw ConfigError("unknown command " + command);
  if (plan) return kExitOk;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool all_pass = true;
  for (const auto& [name, v] : o.checks.items()) {
    (void)name;
    all_pass = all_pass && v.get<bool>();
  }
  json manifest;
  manifest["command"] = command;
  manifest["git_describe"] = build_git_describe();
  manifest["seed"] = seed;
  manifest["replica_seeds"] = "replica r uses derive_seed(seed, r)";
  json config = json::object();
  for (const auto& [k, v] : cfg.entries()) {
    if (k != "run.jobs") config[k] = v;
  }
  manifest["config"] = std::move(config);
  if (cfg.has_law()) manifest["law"] = law_json(cfg.law());
  manifest["outputs"] = out.files();
  manifest["summary"] = o.summary;
  manifest["checks"] = o.checks;
  manifest["checks_passed"] = all_pass;
  if (o.window_failed) manifest["window_audit_failed"] = true;
  out.raw("manifest.json", manifest.dump(2) + "\n");
  json timing;
  timing["wall_seconds"] = wall;
  timing["jobs"] = jobs;
  std::ofstream(out_dir / "timing.json") << timing.dump(2) << '\n';

  std::cout << command << ": wrote " << out.files().size() << " files to " << out_dir.string() << '\n';
  for (const auto& [name, v] : o.checks.items()) {
    std::cout << "  check " << name << ": " << (v.get<bool>() ? "pass" : "FAIL") << '\n';
  }
  if (opt.check && !all_pass) return kExitAssert;
  if (opt.check && o.window_failed) return kExitWindow;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-rate totally asymmetric exclusion: simulation and experiment harness"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  int jobs = 1;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "event-driven trajectory with snapshots"},
      {"lemma1", "slow-rate scan probability vs exact and limiting values"},
      {"thm1", "tagged particle slowdown behind i.i.d. gaps"},
      {"thm2", "jam front count, nu > 0"},
      {"thm3", "jam front count window, nu = 0"},
      {"thm4", "jam front count exponent, -1 < nu < 0"},
      {"burke", "equilibrium gaps and Poisson tagged increments"},
      {"varcheck", "variational formulas vs direct simulation"},
      {"rost", "constant-rate jam density profile"},
      {"glynnwhitt", "constant-rate deep-label calibration"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--jobs", jobs, "worker threads (overrides run.jobs)")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out_dir, "output directory (default out/<command>)");
    sub->add_flag("--assert", opt.check, "exit 3 when an acceptance check fails");
    sub->add_flag("--dry-run", opt.dry_run, "validate and print the plan without simulating");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--jobs")) opt.jobs = jobs;
  try {
    return execute(sub->get_name(), opt);
  } catch (const WindowError& e) {
    std::cerr << "window error: " << e.what() << '\n';
    return kExitWindow;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
