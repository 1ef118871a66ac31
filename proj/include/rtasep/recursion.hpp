#pragma once

// Departure-time recursion for the same dynamics. Particle j's k-th jump
// happens at
//
//   T(j, k) = max(T(j, k-1), T(j+1, k - eta_j)) + E(j, k),   E ~ Exp(p_j),
//
// with T(j+1, m) = 0 for m <= 0. By memorylessness of the clocks this has the
// same law as the graphical construction, but costs one step per jump
// instead of one heap operation per ring, and needs no label window.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rtasep/types.hpp"

namespace rtasep {

using RateFn = std::function<double(Label)>;
using GapFn = std::function<std::int64_t(Label)>;

struct RecursionStats {
  std::int64_t steps = 0;   // evaluated T(j, k) values
  std::int64_t labels = 0;  // labels visited in the final pass
  int retries = 0;          // budget increases (tagged mode)
};

/// sigma_0(t) - sigma_0(0) for each horizon, with labels 0, 1, 2, ... at
/// gaps eta_0, eta_1, ... and rates from `rate`. Exponentials come from
/// per-label sequential streams keyed by `service_seed`.
///
/// The computation assumes particle 0 makes fewer than `budget` jumps and
/// grows the budget until that holds; the result does not depend on the
/// starting value, which only affects cost. 0 picks p_0 t plus slack.
std::vector<std::int64_t> tagged_displacement(const RateFn& rate, const GapFn& gap, Seed service_seed,
                                              std::span<const double> horizons, std::int64_t budget = 0,
                                              RecursionStats* stats = nullptr);

/// Jam start (label -k at site -k, k >= 0). Returns X_t, the number of
/// particles strictly beyond c*t, for each horizon.
std::vector<std::int64_t> jam_front_count(const RateFn& rate, Seed service_seed, std::span<const double> horizons,
                                          double c, RecursionStats* stats = nullptr);

/// Jam start; positions at time t of labels 0, -1, ..., -(n-1), in that order.
std::vector<Position> jam_positions(const RateFn& rate, Seed service_seed, double t, std::int64_t n,
                                    RecursionStats* stats = nullptr);

/// Jam start; position of label -depth at each horizon.
std::vector<Position> jam_label_position(const RateFn& rate, Seed service_seed, std::int64_t depth,
                                         std::span<const double> horizons, RecursionStats* stats = nullptr);

}  // namespace rtasep
