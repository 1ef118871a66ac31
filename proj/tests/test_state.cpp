#include <doctest.h>

#include <sstream>

#include "rtasep/state.hpp"

using namespace rtasep;

TEST_CASE("particle config: positions must increase") {
  CHECK_THROWS(ParticleConfig(0, {0, 0}));
  CHECK_THROWS(ParticleConfig(0, {3, 1}));
  const ParticleConfig p(-2, {-5, -1, 4});
  CHECK(p.labels() == LabelRange{-2, 0});
  CHECK(p.position(-1) == -1);
  CHECK_THROWS(p.position(1));
}

TEST_CASE("gaps count empty sites between neighbours") {
  const ParticleConfig p(0, {0, 1, 4, 5, 9});
  const GapConfig g = particles_to_gaps(p);
  CHECK(g.anchor() == Anchor{0, 0});
  const std::vector<std::int64_t> expect{0, 2, 0, 3};
  CHECK(std::vector<std::int64_t>(g.gaps().begin(), g.gaps().end()) == expect);
  CHECK(gaps_to_particles(g) == p);
}

TEST_CASE("heights are sigma_i - i and nondecreasing") {
  const ParticleConfig p(3, {10, 11, 15});
  const HeightConfig h = particles_to_heights(p);
  CHECK(h.height(3) == 7);
  CHECK(h.height(4) == 7);
  CHECK(h.height(5) == 10);
  CHECK(heights_to_particles(h) == p);
  CHECK_THROWS(HeightConfig(0, {2, 1}));
}

TEST_CASE("conversions round-trip on random configurations") {
  std::uint64_t s = 12345;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> gaps;
    const int n = 1 + trial % 17;
    for (int i = 0; i < n; ++i) {
      s = s * 6364136223846793005ULL + 1442695040888963407ULL;
      gaps.push_back(static_cast<std::int64_t>((s >> 33) % 5));
    }
    const GapConfig g(Anchor{-trial, 3 * trial}, gaps);
    const ParticleConfig p = gaps_to_particles(g);
    CHECK(p.size() == gaps.size() + 1);
    CHECK(particles_to_gaps(p) == g);
    CHECK(heights_to_particles(particles_to_heights(p)) == p);
  }
}

TEST_CASE("negative gaps are rejected") { CHECK_THROWS(GapConfig(Anchor{}, {1, -1})); }

TEST_CASE("snapshot csv leaves the top gap empty") {
  std::ostringstream os;
  write_snapshot_csv(os, ParticleConfig(0, {0, 2}), 1.5, true);
  CHECK(os.str() == "time,label,position,gap,height\n1.5,0,0,1,0\n1.5,1,2,,1\n");
}
