#pragma once

// Grid approximation of glued d_p distances, independent of the geodesic
// engine: Dijkstra over an h-lattice with king-move edges inside each chart
// and crossing edges along gluing loci. Every reported value is the length
// of a genuine piecewise path, so it upper-bounds the true distance; the
// relative surplus is O(h) with a per-p constant measured in the tests.

#include <cstdint>

#include "bicomb/space.hpp"

namespace bicomb {

struct OracleOptions {
  // First pass runs at this resolution on the full padded window and carves
  // out the near-optimal corridor the fine pass is restricted to.
  double coarse_resolution = 1.0 / 8.0;
  // Corridor keeps coarse nodes whose two-sided potential exceeds the coarse
  // optimum by at most this fraction (plus a few coarse cells); it must
  // dominate the king-metric distortion so no competitive route is cut off.
  double slack_fraction = 0.15;
  // Window growth rounds before giving up with WindowTooSmall.
  int max_window_growth = 5;
  // Hard cap on lattice nodes per level.
  std::int64_t node_budget = 40'000'000;
};

double grid_oracle_distance(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y,
                            PExponent p, double resolution, const OracleOptions& opts = {});

}  // namespace bicomb
