#include "rtasep/state.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace rtasep {

ParticleConfig::ParticleConfig(Label first, std::vector<Position> positions, Label origin_label)
    : first_(first), positions_(std::move(positions)), origin_(origin_label) {
  for (std::size_t k = 1; k < positions_.size(); ++k) {
    if (positions_[k] <= positions_[k - 1]) {
      throw std::invalid_argument("particle config: positions must be strictly increasing (label " +
                                  std::to_string(first_ + static_cast<Label>(k)) + ")");
    }
  }
}

Position ParticleConfig::position(Label i) const {
  if (!labels().contains(i)) throw std::out_of_range("particle config: label " + std::to_string(i) + " not stored");
  return positions_[labels().offset(i)];
}

GapConfig::GapConfig(Anchor anchor, std::vector<std::int64_t> gaps) : anchor_(anchor), gaps_(std::move(gaps)) {
  for (std::int64_t g : gaps_) {
    if (g < 0) throw std::invalid_argument("gap config: gaps must be nonnegative");
  }
}

std::int64_t GapConfig::gap(Label i) const {
  if (!gap_labels().contains(i)) throw std::out_of_range("gap config: label " + std::to_string(i) + " not stored");
  return gaps_[gap_labels().offset(i)];
}

HeightConfig::HeightConfig(Label first, std::vector<Position> heights) : first_(first), heights_(std::move(heights)) {
  for (std::size_t k = 1; k < heights_.size(); ++k) {
    if (heights_[k] < heights_[k - 1]) throw std::invalid_argument("height config: heights must be nondecreasing");
  }
}

Position HeightConfig::height(Label i) const {
  if (!labels().contains(i)) throw std::out_of_range("height config: label " + std::to_string(i) + " not stored");
  return heights_[labels().offset(i)];
}

GapConfig particles_to_gaps(const ParticleConfig& cfg) {
  const auto pos = cfg.positions();
  if (pos.empty()) throw std::invalid_argument("particles_to_gaps: empty configuration");
  std::vector<std::int64_t> gaps;
  gaps.reserve(pos.size() - 1);
  for (std::size_t k = 0; k + 1 < pos.size(); ++k) gaps.push_back(pos[k + 1] - pos[k] - 1);
  return GapConfig(Anchor{cfg.labels().lo, pos.front()}, std::move(gaps));
}

ParticleConfig gaps_to_particles(const GapConfig& cfg) {
  const Anchor anchor = cfg.anchor();
  std::vector<Position> pos;
  pos.reserve(cfg.gaps().size() + 1);
  pos.push_back(anchor.position);
  for (std::int64_t g : cfg.gaps()) pos.push_back(pos.back() + g + 1);
  return ParticleConfig(anchor.label, std::move(pos));
}

HeightConfig particles_to_heights(const ParticleConfig& cfg) {
  std::vector<Position> h;
  h.reserve(cfg.size());
  Label i = cfg.labels().lo;
  for (Position s : cfg.positions()) h.push_back(s - i++);
  return HeightConfig(cfg.labels().lo, std::move(h));
}

ParticleConfig heights_to_particles(const HeightConfig& cfg) {
  std::vector<Position> pos;
  pos.reserve(cfg.heights().size());
  Label i = cfg.labels().lo;
  for (Position h : cfg.heights()) pos.push_back(h + i++);
  return ParticleConfig(cfg.labels().lo, std::move(pos));
}

void write_snapshot_csv(std::ostream& os, const ParticleConfig& cfg, double time, bool write_header) {
  if (write_header) os << "time,label,position,gap,height\n";
  const auto pos = cfg.positions();
  const LabelRange labels = cfg.labels();
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const Label i = labels.lo + static_cast<Label>(k);
    os << time << ',' << i << ',' << pos[k] << ',';
    if (k + 1 < pos.size()) os << pos[k + 1] - pos[k] - 1;
    os << ',' << pos[k] - i << '\n';
  }
}

}  // namespace rtasep
