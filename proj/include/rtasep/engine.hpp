#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "rtasep/disorder.hpp"
#include "rtasep/state.hpp"

namespace rtasep {

/// Raised when the dynamics would need a label the window does not store.
class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-label Poisson attempt streams. The k-th spacing of label i is an
/// exponential with the label's base rate, drawn from (seed, i, k) alone, so
/// any number of runs can replay the same rings.
///
/// A schedule can carry a second, smaller "true" rate per label. Each ring
/// then gets a thinning mark, and a run with the thinned view only reacts to
/// marked rings, which form a Poisson stream at the true rate.
class ClockSchedule {
 public:
  ClockSchedule(Seed seed, LabelRange labels, std::vector<double> base_rates);

  static ClockSchedule from_field(const DisorderField& field, Seed seed);
  static ClockSchedule constant(LabelRange labels, double rate, Seed seed);
  /// Base rates max(p_i, floor); the thinned view sees rate p_i.
  static ClockSchedule fastened(const DisorderField& field, double floor, Seed seed);

  /// Sets both rates of label i.
  ClockSchedule& with_override(Label i, double rate);

  Seed seed() const { return seed_; }
  LabelRange labels() const { return labels_; }
  double base_rate(Label i) const;
  double true_rate(Label i) const;

  /// Waiting time before ring k (k = 0 is the first ring).
  double spacing(Label i, std::uint64_t k) const;
  /// Whether ring k of label i is kept by the thinned view.
  bool seen_by_slow(Label i, std::uint64_t k) const;

 private:
  Seed seed_;
  LabelRange labels_;
  std::vector<double> base_;
  std::vector<double> true_;
};

enum class ClockView { full, thinned };

/// What happens when the top stored label rings. free_top lets it jump
/// unconditionally; strict raises WindowError.
enum class WindowPolicy { free_top, strict };

struct EventRecord {
  Label label = 0;
  double time = 0.0;
  bool executed = false;
};

struct RunOptions {
  /// Run label j reads clock label j + clock_offset.
  Label clock_offset = 0;
  ClockView view = ClockView::full;
  WindowPolicy policy = WindowPolicy::free_top;
  bool record_events = false;
  /// Labels whose jump times are kept for tagged_position queries.
  std::vector<Label> tracked;
};

class SimulationRun {
 public:
  using Observer = std::function<void(const SimulationRun&, double)>;

  SimulationRun(ParticleConfig initial, const ClockSchedule& clocks, RunOptions options = {});

  /// Processes every ring in (now, until], then sets now = until.
  void run(double until);
  /// Processes the next ring if it falls at or before `until`.
  bool step(double until);

  double now() const { return now_; }
  double next_time() const;
  LabelRange labels() const { return labels_; }
  const ClockSchedule& clocks() const { return *clocks_; }
  const RunOptions& options() const { return options_; }

  Position position(Label i) const;
  ParticleConfig snapshot() const;
  const ParticleConfig& initial() const { return initial_; }

  std::int64_t attempts(Label i) const;
  std::int64_t jumps(Label i) const;
  std::int64_t total_attempts() const { return total_attempts_; }
  std::int64_t total_jumps() const { return total_jumps_; }

  /// Position of a tracked label at an already simulated time.
  Position tagged_position(Label i, double time) const;
  std::span<const double> jump_times(Label i) const;

  /// Calls f(run, time) once the run has processed every ring up to `time`.
  void add_observer(double time, Observer f);

  const std::vector<EventRecord>& event_log() const { return log_; }

 private:
  struct Pending {
    double time;
    Label label;
    bool operator>(const Pending& o) const { return time > o.time || (time == o.time && label > o.label); }
  };

  void fire_observers(double limit, bool inclusive);
  std::size_t tracked_slot(Label i) const;

  const ClockSchedule* clocks_;
  RunOptions options_;
  ParticleConfig initial_;
  LabelRange labels_;
  std::vector<Position> pos_;
  std::vector<std::uint64_t> ring_index_;
  std::vector<std::int64_t> attempts_;
  std::vector<std::int64_t> jumps_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap_;
  std::vector<std::vector<double>> jump_times_;
  std::vector<std::pair<double, Observer>> observers_;
  std::size_t next_observer_ = 0;
  std::vector<EventRecord> log_;
  double now_ = 0.0;
  std::int64_t total_attempts_ = 0;
  std::int64_t total_jumps_ = 0;
};

/// Advances runs that share one schedule and one label window through the
/// identical ring sequence. `after_event` runs after every ring.
void coupled_run(std::span<SimulationRun* const> runs, double until,
                 const std::function<void(std::span<SimulationRun* const>)>& after_event = {});

/// Number of particles strictly beyond c*t.
std::int64_t front_count(const ParticleConfig& cfg, double t, double c);

enum class WindowMode { tagged, jam };

/// Tagged: labels [0, ceil(K t)]. Jam: labels [-n+1, 0] with
/// n = ceil((c+1) t) + 1 + margin.
LabelRange choose_window(double t, double K, WindowMode mode, double c = 1.0, std::int64_t margin = 0);

}  // namespace rtasep
