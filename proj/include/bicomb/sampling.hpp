#pragma once

// Seeded point sampling on chart atlases. Verification reports record the
// seed they were drawn with, so every batch is reproducible.

#include <algorithm>
#include <random>

#include "bicomb/space.hpp"

namespace bicomb {

class Sampler {
 public:
  Sampler(AtlasPtr space, std::uint64_t seed, double halfwidth = 3.0)
      : space_(std::move(space)), seed_(seed), rng_(seed), halfwidth_(halfwidth) {}

  std::uint64_t seed() const { return seed_; }
  const ChartAtlas& space() const { return *space_; }
  const AtlasPtr& space_ptr() const { return space_; }

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + unit() * (hi - lo); }

  SpacePoint point() {
    const int n = static_cast<int>(space_->charts.size());
    const int c = std::min(static_cast<int>(unit() * n), n - 1);
    return point_in(c);
  }

  // Uniform draw in the chart box, unbounded axes clipped to the sampling
  // halfwidth.
  SpacePoint point_in(int chart) {
    const Chart& ch = space_->chart(chart);
    Vec v(ch.dim);
    for (int i = 0; i < ch.dim; ++i) {
      const double lo = std::max(ch.lo[static_cast<size_t>(i)], -halfwidth_);
      const double hi = std::min(ch.hi[static_cast<size_t>(i)], halfwidth_);
      v[i] = range(lo, hi);
    }
    return {chart, v};
  }

 private:
  AtlasPtr space_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  double halfwidth_;
};

}  // namespace bicomb
