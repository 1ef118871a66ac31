#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rtasep/disorder.hpp"
#include "rtasep/engine.hpp"
#include "rtasep/measures.hpp"
#include "rtasep/state.hpp"

namespace rtasep {

/// Height interface Z^i over columns [low, base]: all columns start at 0 and
/// column base + 1 is infinite. Column j reads clock j and moves up when
/// Z_j + 1 <= Z_{j+1}; the base column is never blocked.
class CornerProcess {
 public:
  CornerProcess(Label base, const ClockSchedule& clocks, Label low = 0);

  void run(double until);
  double now() const { return now_; }
  Label base() const { return base_; }
  Label low() const { return low_; }

  /// Z^i_j(now); infinite for j > base.
  ExtendedReal column(Label j) const;
  /// Time of the first increment of the lowest column, if it has happened.
  std::optional<double> first_passage() const { return first_passage_; }

 private:
  const ClockSchedule* clocks_;
  Label base_;
  Label low_;
  std::vector<std::int64_t> z_;
  std::vector<std::uint64_t> ring_index_;
  std::vector<double> next_;
  double now_ = 0.0;
  std::optional<double> first_passage_;
};

/// Direct simulation of `initial` (top label free) on shared clocks.
ParticleConfig direct_positions(const ParticleConfig& initial, const ClockSchedule& clocks, double t);

/// inf over i in [k, hi] of zeta^i_{k-i}(t) for every stored k. zeta^i
/// starts at sigma_i + j for j <= 0 and its particle j reads clock i + j.
std::vector<Position> evaluate_svar1(const ParticleConfig& initial, const ClockSchedule& clocks, double t);

/// inf over i of sigma_i + xi^i_{k-i}(t), xi^i a jam started at the origin
/// with the same clock translation as zeta^i.
std::vector<Position> evaluate_svar2(const ParticleConfig& initial, const ClockSchedule& clocks, double t);

/// Same formula with the whole xi family driven by fresh rates and clocks
/// drawn from (law, xi_seed), independent of the dynamics of `initial`.
/// Equal to direct simulation in law, not pathwise.
std::vector<Position> evaluate_svar2_annealed(const ParticleConfig& initial, const RateLaw& law, Seed xi_seed,
                                              double t);

enum class CornerMethod { naive, sweep };

struct Svar4Result {
  Label window = 0;                   // base labels 0..window enter the infimum
  std::vector<Position> candidates;   // h_i + Z^i_0(t), i = 0..window
  Position value = 0;                 // minimum of candidates
  std::int64_t edge_corner = 0;       // Z^window_0(t)
  bool audit_passed = false;          // window reaches the top label or Z^window_0(t) = 0
};

/// inf over 0 <= i <= window of h_i + Z^i_0(t). Heights are indexed from
/// label 0; the top stored label bounds the window.
Svar4Result evaluate_svar4(const HeightConfig& heights, const ClockSchedule& clocks, double t, Label window,
                           CornerMethod method = CornerMethod::naive);

struct SplitInfimum {
  ExtendedReal s1 = ExtendedReal::infinity();  // i <= q1 t^{1-alpha}
  ExtendedReal s2 = ExtendedReal::infinity();  // i >  q1 t^{1-alpha}
  double boundary = 0.0;
};

SplitInfimum split_infimum(const Svar4Result& r, double t, double q1, double one_minus_alpha);

/// First time Z^base_0 moves, or nullopt if not by `horizon`. Distributed as
/// a sum of independent Exp(p_base), ..., Exp(p_0).
std::optional<double> corner_first_passage(Label base, const ClockSchedule& clocks, double horizon);

struct VarcheckOptions {
  std::int64_t trials = 1000;
  std::int64_t max_particles = 20;
  double t_max = 10.0;
  double K = 3.0;
  double gap_mean = 1.5;
};

struct VarcheckTrial {
  std::int64_t trial = 0;
  Seed seed = 0;
  std::int64_t particles = 0;
  double t = 0.0;
  Label window = 0;  // final corner window
  bool widened = false;  // the K t window failed its audit and was replaced by the top label
  Position direct = 0;
  Position svar1 = 0;
  Position svar2 = 0;
  Position svar4 = 0;
  bool svar1_all = true;   // every label, not just 0
  bool svar2_all = true;
  bool sweep_agrees = true;
  bool audit_passed = true;  // of the final window
  bool match = true;
};

struct VarcheckReport {
  std::vector<VarcheckTrial> trials;
  std::int64_t svar1_mismatches = 0;
  std::int64_t svar2_mismatches = 0;
  std::int64_t svar4_mismatches = 0;
  std::int64_t sweep_mismatches = 0;
  std::int64_t widened = 0;         // trials whose K t window failed the audit
  std::int64_t audit_failures = 0;  // trials still unaudited after widening
  bool all_match() const {
    return svar1_mismatches == 0 && svar2_mismatches == 0 && svar4_mismatches == 0 && sweep_mismatches == 0;
  }
};

/// Random small instances: rates from `law`, i.i.d. geometric gaps, shared
/// clocks; every formula is compared with direct simulation. A corner window
/// of ceil(K t) labels that fails its audit is counted and widened to the
/// top label.
VarcheckReport varcheck(const RateLaw& law, const VarcheckOptions& options, Seed seed);

/// JSON audit report: one record per trial.
void write_varcheck_json(std::ostream& os, const VarcheckReport& report);

}  // namespace rtasep
