#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of (seed, stream tag, key, counter), so any label window can be
// regenerated without generating its predecessors.

#include <cmath>
#include <cstdint>

#include "rtasep/types.hpp"

namespace rtasep {

enum class Stream : std::uint64_t {
  rates = 0x1001,
  gaps = 0x1002,
  clocks = 0x1003,
  thinning = 0x1004,
  service = 0x1005,
  replica = 0x1006,
  scan = 0x1007,
};

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(Seed seed, Stream stream, std::int64_t key,
                                     std::uint64_t counter = 0) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix64(seed + golden * static_cast<std::uint64_t>(stream));
  h = mix64(h + golden + static_cast<std::uint64_t>(key));
  h = mix64(h ^ (counter * 0xd6e8feb86659fd93ULL + golden));
  return h;
}

/// Maps 64 random bits to the open interval (0, 1).
constexpr double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double counter_uniform(Seed seed, Stream stream, std::int64_t key,
                                 std::uint64_t counter = 0) {
  return unit_open(counter_hash(seed, stream, key, counter));
}

/// Seed for replica `index` of an ensemble driven by `master`.
constexpr Seed derive_seed(Seed master, std::uint64_t index) {
  return counter_hash(master, Stream::replica, static_cast<std::int64_t>(index));
}

/// SplitMix64 as a UniformRandomBitGenerator; used for sequential per-label
/// streams in the departure recursion.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

inline SplitMix64 stream_engine(Seed seed, Stream stream, std::int64_t key) {
  return SplitMix64(counter_hash(seed, stream, key, 0x5bd1e995ULL));
}

}  // namespace rtasep
