#include "rtasep/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/exponential_distribution.hpp>

#include "rtasep/rng.hpp"

namespace rtasep {

namespace {

double max_horizon(std::span<const double> horizons) {
  if (horizons.empty()) throw std::invalid_argument("recursion: no horizons");
  for (double t : horizons) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("recursion: horizons must be finite and >= 0");
  }
  return *std::max_element(horizons.begin(), horizons.end());
}

// Jump times of one label that is blocked by the label ahead of it.
// `ahead` holds the ahead label's jump times that are <= t_max; its later
// jumps are treated as lying beyond t_max. The k-th jump needs the ahead
// label to have made k - offset jumps.
void chain_step(double p, Seed seed, Label label, const std::vector<double>& ahead, std::int64_t offset,
                std::int64_t budget, double t_max, std::vector<double>& out, std::int64_t& steps) {
  out.clear();
  SplitMix64 eng = stream_engine(seed, Stream::service, label);
  boost::random::exponential_distribution<double> exp_dist(p);
  double last = 0.0;
  const auto have = static_cast<std::int64_t>(ahead.size());
  for (std::int64_t k = 1; k <= budget; ++k) {
    const std::int64_t m = k - offset;
    double ready = last;
    if (m > 0) {
      if (m > have) break;
      ready = std::max(ready, ahead[static_cast<std::size_t>(m - 1)]);
    }
    const double tk = ready + exp_dist(eng);
    ++steps;
    if (tk > t_max) break;
    out.push_back(tk);
    last = tk;
  }
}

std::int64_t count_upto(const std::vector<double>& times, double t) {
  return std::upper_bound(times.begin(), times.end(), t) - times.begin();
}

constexpr std::int64_t kUnbounded = INT64_MAX / 4;

// Walks the jam labels 0, -1, -2, ... handing each label's jump times to
// `visit(k, times)`; stops when visit returns false.
template <class Visit>
void jam_chain(const RateFn& rate, Seed seed, double t_max, RecursionStats* stats, Visit visit) {
  std::vector<double> ahead;
  std::vector<double> cur;
  std::int64_t steps = 0;
  std::int64_t k = 0;
  // Lead particle: never blocked.
  {
    SplitMix64 eng = stream_engine(seed, Stream::service, 0);
    boost::random::exponential_distribution<double> exp_dist(rate(0));
    double tk = 0.0;
    for (;;) {
      tk += exp_dist(eng);
      ++steps;
      if (tk > t_max) break;
      cur.push_back(tk);
    }
  }
  for (;;) {
    const bool go_on = visit(k, cur);
    if (!go_on) break;
    std::swap(ahead, cur);
    ++k;
    chain_step(rate(-k), seed, -k, ahead, 0, kUnbounded, t_max, cur, steps);
  }
  if (stats) {
    stats->steps += steps;
    stats->labels += k + 1;
  }
}

}  // namespace

std::vector<std::int64_t> tagged_displacement(const RateFn& rate, const GapFn& gap, Seed service_seed,
                                              std::span<const double> horizons, std::int64_t budget,
                                              RecursionStats* stats) {
  const double t_max = max_horizon(horizons);
  std::vector<std::int64_t> gaps;
  std::vector<std::int64_t> prefix{0};  // prefix[j] = eta_0 + ... + eta_{j-1}
  std::vector<double> rates;
  if (budget <= 0) {
    const double p0 = rate(0);
    budget = static_cast<std::int64_t>(std::ceil(p0 * t_max + 6.0 * std::sqrt(p0 * t_max) + 16.0));
  }
  std::vector<double> ahead;
  std::vector<double> cur;
  int retries = 0;
  for (;;) {
    while (prefix.back() < budget) {
      const auto j = static_cast<Label>(gaps.size());
      const std::int64_t g = gap(j);
      if (g < 0) throw std::invalid_argument("tagged_displacement: negative gap");
      gaps.push_back(g);
      rates.push_back(rate(j));
      prefix.push_back(prefix.back() + g);
    }
    // Labels 0..top-1 have budget - prefix[j] > 0 jumps that can matter.
    std::size_t top = 0;
    while (top < gaps.size() && prefix[top] < budget) ++top;
    std::int64_t steps = 0;
    ahead.clear();
    for (std::size_t jj = top; jj-- > 0;) {
      chain_step(rates[jj], service_seed, static_cast<Label>(jj), ahead, gaps[jj], budget - prefix[jj], t_max, cur,
                 steps);
      std::swap(ahead, cur);
    }
    if (stats) {
      stats->steps += steps;
      stats->labels = static_cast<std::int64_t>(top);
    }
    if (static_cast<std::int64_t>(ahead.size()) < budget) break;
    budget += std::max<std::int64_t>(budget / 4, 16);
    ++retries;
  }
  if (stats) stats->retries = retries;
  std::vector<std::int64_t> out;
  out.reserve(horizons.size());
  for (double t : horizons) out.push_back(count_upto(ahead, t));
  return out;
}

std::vector<std::int64_t> jam_front_count(const RateFn& rate, Seed service_seed, std::span<const double> horizons,
                                          double c, RecursionStats* stats) {
  const double t_max = max_horizon(horizons);
  std::vector<std::int64_t> x(horizons.size(), 0);
  std::vector<bool> open(horizons.size(), true);
  jam_chain(rate, service_seed, t_max, stats, [&](std::int64_t k, const std::vector<double>& times) {
    bool any = false;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      if (!open[h]) continue;
      const double pos = static_cast<double>(-k + count_upto(times, horizons[h]));
      if (pos > c * horizons[h]) {
        ++x[h];
        any = true;
      } else {
        open[h] = false;
      }
    }
    return any;
  });
  return x;
}

std::vector<Position> jam_positions(const RateFn& rate, Seed service_seed, double t, std::int64_t n,
                                    RecursionStats* stats) {
  if (n < 1) throw std::invalid_argument("jam_positions: n must be >= 1");
  std::vector<Position> pos;
  pos.reserve(static_cast<std::size_t>(n));
  const double h[] = {t};
  jam_chain(rate, service_seed, max_horizon(h), stats, [&](std::int64_t k, const std::vector<double>& times) {
    pos.push_back(-k + static_cast<Position>(times.size()));
    return k + 1 < n && !times.empty();
  });
  // Once a label cannot move, no label behind it can.
  for (auto k = static_cast<std::int64_t>(pos.size()); k < n; ++k) pos.push_back(-k);
  return pos;
}

std::vector<Position> jam_label_position(const RateFn& rate, Seed service_seed, std::int64_t depth,
                                         std::span<const double> horizons, RecursionStats* stats) {
  if (depth < 0) throw std::invalid_argument("jam_label_position: depth must be >= 0");
  std::vector<Position> out(horizons.size());
  for (std::size_t h = 0; h < horizons.size(); ++h) out[h] = -depth;
  jam_chain(rate, service_seed, max_horizon(horizons), stats, [&](std::int64_t k, const std::vector<double>& times) {
    if (k == depth) {
      for (std::size_t h = 0; h < horizons.size(); ++h) out[h] = -depth + count_upto(times, horizons[h]);
      return false;
    }
    return !times.empty();
  });
  return out;
}

}  // namespace rtasep
