#pragma once

// Distances and convex-bicombing geodesics in a chart atlas: chart-sequence
// search, convex crossing-point optimization, canonical trajectories with
// runtime length certificates, and the midpoint-iteration machinery.

#include <functional>

#include "bicomb/space.hpp"

namespace bicomb {

// Piecewise-linear path: breakpoints joined by straight segments, each
// segment carried by the named chart.
struct PolyPath {
  std::vector<SpacePoint> breakpoints;
  std::vector<std::string> chart_seq;

  int segments() const { return static_cast<int>(chart_seq.size()); }
  bool single_point() const { return breakpoints.size() == 1; }
};

// Segment endpoints expressed in the carrying chart.
struct SegmentFrame {
  int chart;
  Vec a, b;
};
SegmentFrame segment_frame(const ChartAtlas& atlas, const PolyPath& path, int i);

double path_length(const ChartAtlas& atlas, const PolyPath& path, PExponent p);
// Point at fraction t ∈ [0,1] of the path's d_p arclength.
SpacePoint path_eval(const ChartAtlas& atlas, const PolyPath& path, PExponent p, double t);

// Largest deviation between the two trajectories, measured with d_2
// point-to-segment distances on a dense sample (parametrization-free).
double trajectory_hausdorff(const ChartAtlas& atlas, const PolyPath& a, const PolyPath& b,
                            int samples_per_segment = 32);

struct EngineOptions {
  double tol = 1e-9;
  int max_chart_seq_len = 8;
  // Route product spaces through the generic crossing search instead of the
  // factor-wise product bicombing (diagnostics only).
  bool force_generic = false;
};

double distance(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y, PExponent p,
                const EngineOptions& opts = {});

// Length-minimizing crossing path for the requested p. Flat ℓ^1/ℓ^∞ minima
// are resolved toward the ℓ^2-optimal crossing, so the returned path is the
// canonical representative of the (possibly non-unique) argmin.
PolyPath optimal_path(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y,
                      PExponent p, const EngineOptions& opts = {});

// Canonical bicombing geodesic: the ℓ^2-optimal trajectory re-parametrized at
// constant d_p speed. Certified at runtime: its d_p length must match
// distance(..., p) within tol, else CertificateFailure.
PolyPath geodesic(const ChartAtlas& atlas, const SpacePoint& x, const SpacePoint& y, PExponent p,
                  const EngineOptions& opts = {});

enum class BicombingMethod { canonical, direct_lp, reversibilized, custom };

std::string method_name(BicombingMethod m);

struct BicombingHandle {
  AtlasPtr space;
  PExponent p;
  BicombingMethod method = BicombingMethod::canonical;
  EngineOptions opts;
  // Geodesic selection; null for handles defined only pointwise.
  std::function<PolyPath(const SpacePoint&, const SpacePoint&)> path_fn;
  // σ(x,y,t); defaults to evaluating path_fn at arclength fraction t.
  std::function<SpacePoint(const SpacePoint&, const SpacePoint&, double)> eval_fn;
};

BicombingHandle make_bicombing(AtlasPtr space, PExponent p, BicombingMethod method,
                               const EngineOptions& opts = {});

SpacePoint sigma_eval(const BicombingHandle& handle, const SpacePoint& x, const SpacePoint& y,
                      double t);

struct MidpointTrace {
  std::vector<double> gaps;  // d(x_n, y_n) per iteration
};

SpacePoint midpoint(const BicombingHandle& handle, const SpacePoint& x, const SpacePoint& y,
                    double tol, MidpointTrace* trace = nullptr, int max_iter = 200);

BicombingHandle reversibilize(const BicombingHandle& handle, double tol = 1e-9);

struct LocalCheckResult {
  bool ok = true;
  double worst_gap = 0.0;
  double s = 0.0, t = 0.0;  // arclength fractions of the worst window
};

// Verifies that every subpath of d_p length ≤ eps is itself
// distance-realizing within tol. Requires eps below half the smallest
// breakpoint spacing so each window meets at most one breakpoint.
LocalCheckResult local_geodesic_check(const ChartAtlas& atlas, const PolyPath& path, PExponent p,
                                      double eps, const EngineOptions& opts = {});

}  // namespace bicomb
