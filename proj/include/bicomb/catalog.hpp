#pragma once

// Built-in example spaces: the five two-plane/three-plane model spaces,
// finite patches of the Croke-Kleiner-style plane complexes, and the
// glued half-plane built from a 1-cube / 2-cube block sequence.

#include "bicomb/space.hpp"

namespace bicomb {

// Model spaces 1..5: plane; two planes glued along the x-axis; along the
// main diagonal; three planes chained along x-axis then y-axis; along
// x-axis then diagonal.
AtlasPtr build_lsp(int which);

// Finite patch of the plane complex in which every gluing line is
// horizontal/vertical (angle 90) or horizontal/diagonal (angle 45).
// Planes alternate between "middle" planes carrying both line families at
// offsets {-1,0,1} and "outer" planes carrying one family; every line joins
// one middle and one outer plane, so each local neighborhood matches one of
// the five model spaces. depth counts gluing-graph distance from the root.
AtlasPtr build_ck_patch(int angle, int depth);

// Alternating-run description of a sequence x_1, x_2, ... with x_i ∈ {1, √2}:
// runs[0] ones, then runs[1] entries √2, and so on. Used for the half-plane
// block sequence; run lengths growing by a fixed ratio keep the Cesàro means
// (Σ x_i)/n oscillating instead of converging.
struct BlockSequence {
  std::vector<long long> runs;

  static BlockSequence standard();  // runs 1, 8, 64, 512, 4096

  long long total() const;
  double x(long long i) const;            // 1-based
  double partial_sum(long long n) const;  // Σ_{i<=n} x_i
};

// Half-plane [0,∞) × ℝ assembled from vertical strips, one per block cube:
// a 1-cube contributes a strip of width 1, a 2-cube (crossed along its
// diagonal) a strip of width 2^{1/p}. Coordinates are the cumulative d_p
// arclength along the base half-line, so the atlas is p-specific.
AtlasPtr build_halfplane(const BlockSequence& seq, int cubes, PExponent p);

}  // namespace bicomb
