#include "rtasep/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtasep/rng.hpp"

namespace rtasep {

ClockSchedule::ClockSchedule(Seed seed, LabelRange labels, std::vector<double> base_rates)
    : seed_(seed), labels_(labels), base_(std::move(base_rates)) {
  if (labels_.empty() || static_cast<std::int64_t>(base_.size()) != labels_.size()) {
    throw std::invalid_argument("clock schedule: one rate per label required");
  }
  for (double r : base_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("clock schedule: rates must be positive");
  }
  true_ = base_;
}

ClockSchedule ClockSchedule::from_field(const DisorderField& field, Seed seed) {
  const auto r = field.rates();
  return ClockSchedule(seed, field.labels(), std::vector<double>(r.begin(), r.end()));
}

ClockSchedule ClockSchedule::constant(LabelRange labels, double rate, Seed seed) {
  return ClockSchedule(seed, labels, std::vector<double>(static_cast<std::size_t>(labels.size()), rate));
}

ClockSchedule ClockSchedule::fastened(const DisorderField& field, double floor, Seed seed) {
  const auto r = field.rates();
  std::vector<double> fast(r.size());
  std::transform(r.begin(), r.end(), fast.begin(), [floor](double p) { return std::max(p, floor); });
  ClockSchedule s(seed, field.labels(), std::move(fast));
  s.true_.assign(r.begin(), r.end());
  return s;
}

ClockSchedule& ClockSchedule::with_override(Label i, double rate) {
  if (!labels_.contains(i)) throw std::out_of_range("clock schedule: override label outside window");
  if (!(rate > 0.0)) throw std::invalid_argument("clock schedule: rates must be positive");
  base_[labels_.offset(i)] = rate;
  true_[labels_.offset(i)] = rate;
  return *this;
}

double ClockSchedule::base_rate(Label i) const {
  if (!labels_.contains(i)) throw WindowError("clock schedule: label " + std::to_string(i) + " outside window");
  return base_[labels_.offset(i)];
}

double ClockSchedule::true_rate(Label i) const {
  if (!labels_.contains(i)) throw WindowError("clock schedule: label " + std::to_string(i) + " outside window");
  return true_[labels_.offset(i)];
}

double ClockSchedule::spacing(Label i, std::uint64_t k) const {
  return -std::log(counter_uniform(seed_, Stream::clocks, i, k)) / base_rate(i);
}

bool ClockSchedule::seen_by_slow(Label i, std::uint64_t k) const {
  const std::size_t off = labels_.offset(i);
  if (true_[off] >= base_[off]) return true;
  return counter_uniform(seed_, Stream::thinning, i, k) < true_[off] / base_[off];
}

SimulationRun::SimulationRun(ParticleConfig initial, const ClockSchedule& clocks, RunOptions options)
    : clocks_(&clocks), options_(std::move(options)), initial_(std::move(initial)), labels_(initial_.labels()) {
  if (labels_.empty()) throw std::invalid_argument("simulation run: empty configuration");
  const LabelRange clock_labels = clocks.labels();
  if (!clock_labels.contains(labels_.lo + options_.clock_offset) ||
      !clock_labels.contains(labels_.hi + options_.clock_offset)) {
    throw WindowError("simulation run: clock schedule does not cover the particle window");
  }
  const auto p = initial_.positions();
  pos_.assign(p.begin(), p.end());
  const std::size_t n = pos_.size();
  ring_index_.assign(n, 0);
  attempts_.assign(n, 0);
  jumps_.assign(n, 0);
  jump_times_.resize(options_.tracked.size());
  for (Label i : options_.tracked) {
    if (!labels_.contains(i)) throw std::out_of_range("simulation run: tracked label outside window");
  }
  for (Label i = labels_.lo; i <= labels_.hi; ++i) heap_.push({clocks.spacing(i + options_.clock_offset, 0), i});
}

double SimulationRun::next_time() const { return heap_.top().time; }

void SimulationRun::fire_observers(double limit, bool inclusive) {
  while (next_observer_ < observers_.size()) {
    const double t = observers_[next_observer_].first;
    if (inclusive ? t > limit : t >= limit) break;
    observers_[next_observer_].second(*this, t);
    ++next_observer_;
  }
}

bool SimulationRun::step(double until) {
  const Pending ev = heap_.top();
  if (ev.time > until) return false;
  fire_observers(ev.time, false);
  heap_.pop();
  const std::size_t off = labels_.offset(ev.label);
  const Label clock_label = ev.label + options_.clock_offset;
  const std::uint64_t k = ring_index_[off]++;
  now_ = std::max(now_, ev.time);
  heap_.push({ev.time + clocks_->spacing(clock_label, k + 1), ev.label});

  if (options_.view == ClockView::thinned && !clocks_->seen_by_slow(clock_label, k)) return true;
  ++attempts_[off];
  ++total_attempts_;
  bool executed = false;
  if (ev.label == labels_.hi) {
    if (options_.policy == WindowPolicy::strict) {
      throw WindowError("simulation run: top label " + std::to_string(ev.label) + " rang under the strict policy");
    }
    executed = true;
  } else {
    executed = pos_[off + 1] - pos_[off] >= 2;
  }
  if (executed) {
    ++pos_[off];
    ++jumps_[off];
    ++total_jumps_;
    for (std::size_t s = 0; s < options_.tracked.size(); ++s) {
      if (options_.tracked[s] == ev.label) jump_times_[s].push_back(ev.time);
    }
  }
  if (options_.record_events) log_.push_back({ev.label, ev.time, executed});
  return true;
}

void SimulationRun::run(double until) {
  if (until < now_) throw std::invalid_argument("simulation run: cannot run backwards in time");
  while (step(until)) {
  }
  fire_observers(until, true);
  now_ = until;
}

Position SimulationRun::position(Label i) const {
  if (!labels_.contains(i)) throw WindowError("simulation run: label " + std::to_string(i) + " outside window");
  return pos_[labels_.offset(i)];
}

ParticleConfig SimulationRun::snapshot() const { return ParticleConfig(labels_.lo, pos_, initial_.origin_label()); }

std::int64_t SimulationRun::attempts(Label i) const {
  if (!labels_.contains(i)) throw WindowError("simulation run: label outside window");
  return attempts_[labels_.offset(i)];
}

std::int64_t SimulationRun::jumps(Label i) const {
  if (!labels_.contains(i)) throw WindowError("simulation run: label outside window");
  return jumps_[labels_.offset(i)];
}

std::size_t SimulationRun::tracked_slot(Label i) const {
  for (std::size_t s = 0; s < options_.tracked.size(); ++s) {
    if (options_.tracked[s] == i) return s;
  }
  throw std::invalid_argument("simulation run: label " + std::to_string(i) + " is not tracked");
}

Position SimulationRun::tagged_position(Label i, double time) const {
  if (time > now_) throw std::invalid_argument("tagged_position: time not simulated yet");
  if (time < 0.0) throw std::invalid_argument("tagged_position: negative time");
  const auto& times = jump_times_[tracked_slot(i)];
  const auto n = std::upper_bound(times.begin(), times.end(), time) - times.begin();
  return initial_.position(i) + n;
}

std::span<const double> SimulationRun::jump_times(Label i) const { return jump_times_[tracked_slot(i)]; }

void SimulationRun::add_observer(double time, Observer f) {
  if (time < now_) throw std::invalid_argument("observer time already passed");
  auto it = std::upper_bound(observers_.begin() + static_cast<std::ptrdiff_t>(next_observer_), observers_.end(), time,
                             [](double t, const auto& o) { return t < o.first; });
  observers_.insert(it, {time, std::move(f)});
}

void coupled_run(std::span<SimulationRun* const> runs, double until,
                 const std::function<void(std::span<SimulationRun* const>)>& after_event) {
  if (runs.empty()) return;
  const SimulationRun& first = *runs.front();
  for (const SimulationRun* r : runs) {
    if (&r->clocks() != &first.clocks() || r->labels() != first.labels() ||
        r->options().clock_offset != first.options().clock_offset) {
      throw WindowError("coupled_run: runs must share one schedule and one label window");
    }
  }
  while (first.next_time() <= until) {
    const double t = first.next_time();
    for (SimulationRun* r : runs) {
      if (r->next_time() != t) throw std::logic_error("coupled_run: ring sequences diverged");
      r->step(until);
    }
    if (after_event) after_event(runs);
  }
  for (SimulationRun* r : runs) r->run(until);
}

std::int64_t front_count(const ParticleConfig& cfg, double t, double c) {
  const double edge = c * t;
  std::int64_t n = 0;
  for (Position p : cfg.positions()) {
    if (static_cast<double>(p) > edge) ++n;
  }
  return n;
}

LabelRange choose_window(double t, double K, WindowMode mode, double c, std::int64_t margin) {
  if (!(t >= 0.0)) throw std::invalid_argument("choose_window: t must be nonnegative");
  if (mode == WindowMode::tagged) {
    if (!(K > 1.0)) throw std::invalid_argument("choose_window: K must exceed 1");
    return {0, static_cast<Label>(std::ceil(K * t))};
  }
  const auto n = static_cast<Label>(std::ceil((c + 1.0) * t)) + 1 + margin;
  return {-n + 1, 0};
}

}  // namespace rtasep
