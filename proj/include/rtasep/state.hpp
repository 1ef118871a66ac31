#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rtasep/types.hpp"

namespace rtasep {

// Three views of one exclusion configuration over a finite label window.
//
// Gap convention: eta_i = sigma_{i+1} - sigma_i - 1, so eta_i = h_{i+1} - h_i
// with h_i = sigma_i - i. A gap is attached to the particle behind it.

class ParticleConfig {
 public:
  ParticleConfig() = default;
  /// Labels first, first+1, ... carry the given positions; they must be
  /// strictly increasing.
  ParticleConfig(Label first, std::vector<Position> positions, Label origin_label = 0);

  LabelRange labels() const { return {first_, first_ + static_cast<Label>(positions_.size()) - 1}; }
  Label origin_label() const { return origin_; }
  std::span<const Position> positions() const { return positions_; }
  Position position(Label i) const;
  std::size_t size() const { return positions_.size(); }

  friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;

 private:
  Label first_ = 0;
  std::vector<Position> positions_;
  Label origin_ = 0;
};

struct Anchor {
  Label label = 0;
  Position position = 0;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Gaps eta_i for labels anchor.label, ..., anchor.label + size - 1; the
/// particle labels run one further.
class GapConfig {
 public:
  GapConfig() = default;
  GapConfig(Anchor anchor, std::vector<std::int64_t> gaps);

  Anchor anchor() const { return anchor_; }
  LabelRange gap_labels() const { return {anchor_.label, anchor_.label + static_cast<Label>(gaps_.size()) - 1}; }
  LabelRange particle_labels() const { return {anchor_.label, anchor_.label + static_cast<Label>(gaps_.size())}; }
  std::span<const std::int64_t> gaps() const { return gaps_; }
  std::int64_t gap(Label i) const;

  friend bool operator==(const GapConfig&, const GapConfig&) = default;

 private:
  Anchor anchor_;
  std::vector<std::int64_t> gaps_;
};

/// Heights h_i = sigma_i - i; nondecreasing in i.
class HeightConfig {
 public:
  HeightConfig() = default;
  HeightConfig(Label first, std::vector<Position> heights);

  LabelRange labels() const { return {first_, first_ + static_cast<Label>(heights_.size()) - 1}; }
  std::span<const Position> heights() const { return heights_; }
  Position height(Label i) const;

  friend bool operator==(const HeightConfig&, const HeightConfig&) = default;

 private:
  Label first_ = 0;
  std::vector<Position> heights_;
};

GapConfig particles_to_gaps(const ParticleConfig& cfg);
ParticleConfig gaps_to_particles(const GapConfig& cfg);
HeightConfig particles_to_heights(const ParticleConfig& cfg);
ParticleConfig heights_to_particles(const HeightConfig& cfg);

/// Appends rows time,label,position,gap,height. The top label has no gap and
/// leaves that field empty. Pass write_header for the first snapshot.
void write_snapshot_csv(std::ostream& os, const ParticleConfig& cfg, double time, bool write_header);

}  // namespace rtasep
