#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rtasep/disorder.hpp"
#include "rtasep/state.hpp"

namespace rtasep {

/// Geometric product equilibrium at common velocity a. With a fastening
/// floor r, every rate is replaced by max(p_i, r) first.
struct EquilibriumSpec {
  double a = 0.0;
  std::optional<double> fastening;
};

enum class GapFamily { geometric, uniform, two_point };

GapFamily parse_gap_family(const std::string& name);
std::string to_string(GapFamily family);

/// i.i.d. gaps with mean u. `uniform` is uniform on {0, ..., 2u} and needs
/// integer u; `two_point` puts mass u/upper on `upper` and the rest on 0,
/// with upper defaulting to ceil(2u).
struct IIDGapSpec {
  double mean = 1.0;
  GapFamily family = GapFamily::geometric;
  std::optional<std::int64_t> two_point_upper;

  void validate() const;
  double variance() const;
};

/// max(p, floor) when fastened.
double fastened_rate(const EquilibriumSpec& spec, double p);

/// One geometric draw with P[k] = (1-r) r^k.
std::int64_t geometric_from_uniform(double ratio, double u);

std::int64_t draw_equilibrium_gap(const DisorderField& field, const EquilibriumSpec& spec, Seed seed, Label i);
std::int64_t draw_iid_gap(const IIDGapSpec& spec, Seed seed, Label i);

/// Gaps for `gap_labels`; the particle anchored at gap_labels.lo sits at
/// anchor_position. Throws std::domain_error naming the first label with
/// a >= max(p_i, floor).
GapConfig sample_equilibrium_gaps(const DisorderField& field, const EquilibriumSpec& spec, LabelRange gap_labels,
                                  Seed seed, Position anchor_position = 0);

GapConfig sample_iid_gaps(const IIDGapSpec& spec, LabelRange gap_labels, Seed seed, Position anchor_position = 0);

/// Labels -n+1..0 on sites -n+1..0.
ParticleConfig jam_initial(std::int64_t n);

/// Average of a/(p̂_i - a) over the field's labels.
double quenched_mean_gap(const DisorderField& field, const EquilibriumSpec& spec);

/// int a/(p̂ - a) dF(p) with p̂ = max(p, floor) when fastened.
double annealed_mean_gap(const RateLaw& law, const EquilibriumSpec& spec);

}  // namespace rtasep
