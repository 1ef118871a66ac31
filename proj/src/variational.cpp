#include "rtasep/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include <json.hpp>

#include "rtasep/rng.hpp"

namespace rtasep {

namespace {

struct Ring {
  double time;
  Label label;
  bool operator>(const Ring& o) const { return time > o.time || (time == o.time && label > o.label); }
};

using RingHeap = std::priority_queue<Ring, std::vector<Ring>, std::greater<>>;

void check_covers(const ClockSchedule& clocks, Label lo, Label hi) {
  if (!clocks.labels().contains(lo) || !clocks.labels().contains(hi)) {
    throw WindowError("variational: clock schedule does not cover labels " + std::to_string(lo) + ".." +
                      std::to_string(hi));
  }
}

}  // namespace

CornerProcess::CornerProcess(Label base, const ClockSchedule& clocks, Label low)
    : clocks_(&clocks), base_(base), low_(low) {
  if (base < low) throw std::invalid_argument("corner process: base below lowest column");
  check_covers(clocks, low, base);
  const auto n = static_cast<std::size_t>(base - low + 1);
  z_.assign(n, 0);
  ring_index_.assign(n, 0);
  next_.resize(n);
  for (Label j = low; j <= base; ++j) next_[static_cast<std::size_t>(j - low)] = clocks.spacing(j, 0);
}

void CornerProcess::run(double until) {
  if (until < now_) throw std::invalid_argument("corner process: cannot run backwards");
  RingHeap heap;
  for (Label j = low_; j <= base_; ++j) heap.push({next_[static_cast<std::size_t>(j - low_)], j});
  while (heap.top().time <= until) {
    const Ring r = heap.top();
    heap.pop();
    const auto off = static_cast<std::size_t>(r.label - low_);
    const std::uint64_t k = ring_index_[off]++;
    next_[off] = r.time + clocks_->spacing(r.label, k + 1);
    heap.push({next_[off], r.label});
    if (r.label == base_ || z_[off] + 1 <= z_[off + 1]) {
      ++z_[off];
      if (off == 0 && !first_passage_) first_passage_ = r.time;
    }
  }
  now_ = until;
}

ExtendedReal CornerProcess::column(Label j) const {
  if (j > base_) return ExtendedReal::infinity();
  if (j < low_) throw std::out_of_range("corner process: column below the stored range");
  return ExtendedReal(static_cast<double>(z_[static_cast<std::size_t>(j - low_)]));
}

ParticleConfig direct_positions(const ParticleConfig& initial, const ClockSchedule& clocks, double t) {
  SimulationRun run(initial, clocks);
  run.run(t);
  return run.snapshot();
}

namespace {

// Runs a jam-shaped process for base label i over run labels [lo - i, 0]
// reading clocks lo..i, with particle j started at shift + j.
std::vector<Position> translated_jam(Label i, Label lo, Position shift, const ClockSchedule& clocks, double t) {
  const Label n = i - lo + 1;
  std::vector<Position> pos(static_cast<std::size_t>(n));
  for (Label k = 0; k < n; ++k) pos[static_cast<std::size_t>(k)] = shift + (lo - i) + k;
  RunOptions opts;
  opts.clock_offset = i;
  SimulationRun run(ParticleConfig(lo - i, std::move(pos)), clocks, opts);
  run.run(t);
  const ParticleConfig snap = run.snapshot();
  return {snap.positions().begin(), snap.positions().end()};
}

std::vector<Position> infimum_over_bases(const ParticleConfig& initial, const ClockSchedule& clocks, double t,
                                         bool shift_by_sigma) {
  const LabelRange labels = initial.labels();
  check_covers(clocks, labels.lo, labels.hi);
  std::vector<Position> best(static_cast<std::size_t>(labels.size()), std::numeric_limits<Position>::max());
  for (Label i = labels.lo; i <= labels.hi; ++i) {
    const Position sigma_i = initial.position(i);
    // Process i only matters for k in [lo, i]; its particle k - i reads clock k.
    const auto pos = translated_jam(i, labels.lo, shift_by_sigma ? sigma_i : 0, clocks, t);
    for (Label k = labels.lo; k <= i; ++k) {
      const Position v = pos[static_cast<std::size_t>(k - labels.lo)] + (shift_by_sigma ? 0 : sigma_i);
      auto& b = best[labels.offset(k)];
      b = std::min(b, v);
    }
  }
  return best;
}

}  // namespace

std::vector<Position> evaluate_svar1(const ParticleConfig& initial, const ClockSchedule& clocks, double t) {
  return infimum_over_bases(initial, clocks, t, true);
}

std::vector<Position> evaluate_svar2(const ParticleConfig& initial, const ClockSchedule& clocks, double t) {
  return infimum_over_bases(initial, clocks, t, false);
}

std::vector<Position> evaluate_svar2_annealed(const ParticleConfig& initial, const RateLaw& law, Seed xi_seed,
                                              double t) {
  const DisorderField field = sample_rates(law, initial.labels(), xi_seed);
  return evaluate_svar2(initial, ClockSchedule::from_field(field, xi_seed), t);
}

Svar4Result evaluate_svar4(const HeightConfig& heights, const ClockSchedule& clocks, double t, Label window,
                           CornerMethod method) {
  const LabelRange labels = heights.labels();
  if (labels.lo != 0) throw std::invalid_argument("evaluate_svar4: heights must start at label 0");
  if (window < 0) throw std::invalid_argument("evaluate_svar4: negative window");
  window = std::min(window, labels.hi);
  check_covers(clocks, 0, window);

  std::vector<std::int64_t> z0(static_cast<std::size_t>(window + 1), 0);
  if (method == CornerMethod::naive) {
    for (Label i = 0; i <= window; ++i) {
      CornerProcess z(i, clocks);
      z.run(t);
      z0[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(z.column(0).value());
    }
  } else {
    // All corners at once: z[i][j] for j <= i, one pass over the rings.
    std::vector<std::vector<std::int64_t>> z(static_cast<std::size_t>(window + 1));
    for (Label i = 0; i <= window; ++i) z[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i + 1), 0);
    std::vector<std::uint64_t> ring(static_cast<std::size_t>(window + 1), 0);
    RingHeap heap;
    for (Label j = 0; j <= window; ++j) heap.push({clocks.spacing(j, 0), j});
    while (heap.top().time <= t) {
      const Ring r = heap.top();
      heap.pop();
      const auto j = static_cast<std::size_t>(r.label);
      const std::uint64_t k = ring[j]++;
      heap.push({r.time + clocks.spacing(r.label, k + 1), r.label});
      for (std::size_t i = j; i < z.size(); ++i) {
        if (i == j || z[i][j] + 1 <= z[i][j + 1]) ++z[i][j];
      }
    }
    for (std::size_t i = 0; i < z.size(); ++i) z0[i] = z[i][0];
  }

  Svar4Result r;
  r.window = window;
  r.candidates.resize(z0.size());
  for (std::size_t i = 0; i < z0.size(); ++i) r.candidates[i] = heights.height(static_cast<Label>(i)) + z0[i];
  r.value = *std::min_element(r.candidates.begin(), r.candidates.end());
  r.edge_corner = z0.back();
  r.audit_passed = window == labels.hi || r.edge_corner == 0;
  return r;
}

SplitInfimum split_infimum(const Svar4Result& r, double t, double q1, double one_minus_alpha) {
  SplitInfimum s;
  s.boundary = q1 * std::pow(t, one_minus_alpha);
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const auto v = static_cast<double>(r.candidates[i]);
    ExtendedReal& slot = static_cast<double>(i) <= s.boundary ? s.s1 : s.s2;
    if (slot.is_infinite() || v < slot.value()) slot = ExtendedReal(v);
  }
  return s;
}

std::optional<double> corner_first_passage(Label base, const ClockSchedule& clocks, double horizon) {
  CornerProcess z(base, clocks);
  z.run(horizon);
  return z.first_passage();
}

VarcheckReport varcheck(const RateLaw& law, const VarcheckOptions& options, Seed seed) {
  if (options.max_particles < 2) throw std::invalid_argument("varcheck: need at least two particles");
  if (!(options.t_max > 0.0)) throw std::invalid_argument("varcheck: t_max must be positive");
  VarcheckReport report;
  const IIDGapSpec gap_spec{options.gap_mean, GapFamily::geometric, std::nullopt};
  for (std::int64_t trial = 0; trial < options.trials; ++trial) {
    const Seed ts = derive_seed(seed, static_cast<std::uint64_t>(trial));
    VarcheckTrial rec;
    rec.trial = trial;
    rec.seed = ts;
    rec.particles = 2 + static_cast<std::int64_t>(counter_uniform(ts, Stream::replica, 1) *
                                                  static_cast<double>(options.max_particles - 1));
    rec.particles = std::min(rec.particles, options.max_particles);
    rec.t = options.t_max * counter_uniform(ts, Stream::replica, 2);
    const Label top = rec.particles - 1;

    const DisorderField field = sample_rates(law, {0, top}, ts);
    const ParticleConfig initial = gaps_to_particles(sample_iid_gaps(gap_spec, {0, top - 1}, ts));
    const ClockSchedule clocks = ClockSchedule::from_field(field, ts);

    const ParticleConfig direct = direct_positions(initial, clocks, rec.t);
    const auto s1 = evaluate_svar1(initial, clocks, rec.t);
    const auto s2 = evaluate_svar2(initial, clocks, rec.t);
    rec.window = std::min<Label>(top, static_cast<Label>(std::ceil(options.K * rec.t)));
    const HeightConfig h = particles_to_heights(initial);
    Svar4Result naive = evaluate_svar4(h, clocks, rec.t, rec.window, CornerMethod::naive);
    if (!naive.audit_passed) {
      rec.widened = true;
      rec.window = top;
      naive = evaluate_svar4(h, clocks, rec.t, rec.window, CornerMethod::naive);
    }
    const Svar4Result sweep = evaluate_svar4(h, clocks, rec.t, rec.window, CornerMethod::sweep);

    const auto d = direct.positions();
    rec.direct = d[0];
    rec.svar1 = s1[0];
    rec.svar2 = s2[0];
    rec.svar4 = naive.value;
    rec.svar1_all = std::equal(d.begin(), d.end(), s1.begin(), s1.end());
    rec.svar2_all = std::equal(d.begin(), d.end(), s2.begin(), s2.end());
    rec.sweep_agrees = naive.candidates == sweep.candidates;
    rec.audit_passed = naive.audit_passed;
    const bool svar4_ok = !rec.audit_passed || rec.svar4 == rec.direct;
    rec.match = rec.svar1_all && rec.svar2_all && rec.sweep_agrees && svar4_ok;

    report.svar1_mismatches += rec.svar1_all ? 0 : 1;
    report.svar2_mismatches += rec.svar2_all ? 0 : 1;
    report.svar4_mismatches += svar4_ok ? 0 : 1;
    report.sweep_mismatches += rec.sweep_agrees ? 0 : 1;
    report.widened += rec.widened ? 1 : 0;
    report.audit_failures += rec.audit_passed ? 0 : 1;
    report.trials.push_back(rec);
  }
  return report;
}

void write_varcheck_json(std::ostream& os, const VarcheckReport& report) {
  nlohmann::ordered_json j;
  j["trials"] = static_cast<std::int64_t>(report.trials.size());
  j["svar1_mismatches"] = report.svar1_mismatches;
  j["svar2_mismatches"] = report.svar2_mismatches;
  j["svar4_mismatches"] = report.svar4_mismatches;
  j["sweep_mismatches"] = report.sweep_mismatches;
  j["widened"] = report.widened;
  j["audit_failures"] = report.audit_failures;
  j["all_match"] = report.all_match();
  auto& records = j["records"] = nlohmann::ordered_json::array();
  for (const VarcheckTrial& t : report.trials) {
    nlohmann::ordered_json r;
    r["trial"] = t.trial;
    r["seed"] = t.seed;
    r["particles"] = t.particles;
    r["t"] = t.t;
    r["window"] = t.window;
    r["widened"] = t.widened;
    r["direct"] = t.direct;
    r["svar1"] = t.svar1;
    r["svar2"] = t.svar2;
    r["svar4"] = t.svar4;
    r["audit_passed"] = t.audit_passed;
    r["match"] = t.match;
    records.push_back(std::move(r));
  }
  os << j.dump(2) << '\n';
}

}  // namespace rtasep
