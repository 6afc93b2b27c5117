#pragma once

// Statistical verification of bicombing axioms, the conical-versus-convex
// comparison, the ray projection inequality, and isometry displacement and
// axis numerics. Checks report violations; they never throw on them.

#include <string>
#include <vector>

#include "bicomb/engine.hpp"
#include "bicomb/sampling.hpp"

namespace bicomb {

enum class Axiom { conical, consistent, convex, reversible, equivariant, projection };

std::string axiom_name(Axiom a);

// Isometry given as one affine map per chart; apply() is total on
// chart-resident points and must commute with the gluings.
struct ChartMap {
  int target = -1;
  std::array<std::array<double, kMaxDim>, kMaxDim> linear{};
  Vec offset;
};

struct Isometry {
  std::string name = "isometry";
  std::vector<ChartMap> maps;

  SpacePoint apply(const ChartAtlas& atlas, const SpacePoint& x) const;

  static Isometry identity(const ChartAtlas& atlas);
  // Every chart shifted by the same vector; callers pick shifts that respect
  // the gluings (axis translations along gluing lines, glides).
  static Isometry translation(const ChartAtlas& atlas, const Vec& shift);
};

struct AxiomWitness {
  SpacePoint x, y, x2, y2;
  double s = 0.0, t = 0.0;
};

struct AxiomReport {
  Axiom axiom = Axiom::conical;
  int samples = 0;
  std::uint64_t seed = 0;
  double max_violation = 0.0;
  AxiomWitness witness;
  std::string note;  // skip or precondition annotations, empty when clean

  std::string json(const ChartAtlas& atlas) const;
};

// Violation of one axiom on one tuple; re-evaluating a report's witness
// returns its max_violation.
double evaluate_axiom(const BicombingHandle& handle, Axiom axiom, const AxiomWitness& w,
                      const Isometry* iso = nullptr);

std::vector<AxiomReport> check_axioms(const BicombingHandle& handle,
                                      const std::vector<Axiom>& axioms, std::uint64_t seed,
                                      int samples, const Isometry* iso = nullptr,
                                      double halfwidth = 3.0);

// Convexity excess measured after confirming the handle is conical and
// consistent at pre_tol; the conical/consistent levels ride along in note,
// and a precondition miss skips the measurement instead of throwing.
AxiomReport check_ccc_implication(const BicombingHandle& handle, std::uint64_t seed, int samples,
                                  double pre_tol = 1e-7, double halfwidth = 3.0);

// Excess of d(rho_o^x(r), rho_o^y(r)) over 2 d(x,y) r / d(o,x) on sampled
// (o, x, y, r) with max(d(o,x), d(o,y)) >= r.
AxiomReport check_projection_inequality(const BicombingHandle& handle, std::uint64_t seed,
                                        int samples, double halfwidth = 3.0);

struct DisplacementResult {
  double inf_estimate = 0.0;
  std::vector<SpacePoint> near_min;
};

// inf over sampled points of d(x, iso(x)), locally refined by coordinate
// descent from the best samples. The map is first spot-checked to be
// isometric within 1e-9; failures are rejected.
DisplacementResult displacement(const AtlasPtr& space, const Isometry& iso, PExponent p,
                                std::uint64_t seed, int samples = 400, int refine_iters = 60,
                                double tol = 1e-9);

struct AxisSpec {
  SpacePoint base;
  Vec direction;       // unit d_p speed in the base chart
  double period = 0.0;  // claimed translation length T
};

// True iff the line is an axis for the isometry under the handle's
// bicombing: the map advances the line by its period, sampled sub-segments
// are distance-realizing, and their trajectories match handle geodesics.
bool axis_check(const BicombingHandle& handle, const Isometry& iso, const AxisSpec& line,
                double tol = 1e-7);

// Deliberately damaged copy for negative controls: evaluation is warped to
// t + nudge sin(pi t), so the midpoint lands off-center and conical, convex,
// consistent, and reversible all fail by an amount of order nudge.
BicombingHandle corrupt_midpoint(const BicombingHandle& handle, double nudge = 0.05);

}  // namespace bicomb
