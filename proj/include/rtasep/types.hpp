#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace rtasep {

using Label = std::int64_t;
using Position = std::int64_t;
using Seed = std::uint64_t;

/// Closed integer interval of particle labels, [lo, hi].
struct LabelRange {
  Label lo = 0;
  Label hi = -1;

  constexpr bool empty() const { return hi < lo; }
  constexpr std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
  constexpr bool contains(Label i) const { return lo <= i && i <= hi; }
  constexpr std::size_t offset(Label i) const { return static_cast<std::size_t>(i - lo); }

  friend constexpr bool operator==(const LabelRange&, const LabelRange&) = default;
};

/// A real number or +infinity. Infinity is a value here, not an overflow.
class ExtendedReal {
 public:
  constexpr explicit ExtendedReal(double v) : value_(v), infinite_(false) {}
  static constexpr ExtendedReal infinity() { return ExtendedReal(); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw std::domain_error("value requested from an infinite quantity");
    return value_;
  }

  /// Finite value or IEEE +inf; for reporting only.
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

 private:
  constexpr ExtendedReal() : value_(0.0), infinite_(true) {}
  double value_;
  bool infinite_;
};

}  // namespace rtasep
