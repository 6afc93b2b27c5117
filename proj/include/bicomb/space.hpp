#pragma once

// Chart atlases: flat charts glued along affine loci (lines, faces, vertices).

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bicomb/lp.hpp"

namespace bicomb {

struct Chart {
  std::string id;
  int dim = 2;
  std::string kind = "plane";  // plane | interval | box | product
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};

  Chart() {
    lo.fill(-std::numeric_limits<double>::infinity());
    hi.fill(std::numeric_limits<double>::infinity());
  }

  bool bounded(int i) const { return std::isfinite(lo[i]) && std::isfinite(hi[i]); }
  bool contains(const Vec& u, double tol = 1e-9) const {
    if (u.dim() != dim) return false;
    for (int i = 0; i < dim; ++i)
      if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
    return true;
  }
  Vec clamp(const Vec& u) const {
    Vec r = u;
    for (int i = 0; i < dim; ++i) r[i] = std::min(std::max(r[i], lo[i]), hi[i]);
    return r;
  }
};

// Affine sub-box of a chart: base + Σ t_i·dirs_i with t_i ∈ [plo_i, phi_i].
// nparams 0 is a single point (vertex gluing), 1 a line or edge, 2 a face.
struct Locus {
  Vec base;
  std::vector<Vec> dirs;
  std::vector<double> plo, phi;

  int nparams() const { return static_cast<int>(dirs.size()); }
  Vec at(const std::vector<double>& t) const;
  Vec at(const double* t, int n) const;
  // Least-squares parameters of u on the affine span, clamped to the box.
  // Unclamped parameters give the distance to the whole affine span, a lower
  // bound for the box-restricted locus.
  std::vector<double> project(const Vec& u, bool clamp = true) const;
};

struct Gluing {
  std::string name;
  int chart_a = -1, chart_b = -1;
  Locus locus_a, locus_b;  // identical parameter boxes; t ↦ locus_a(t) ∼ locus_b(t)
};

struct SpacePoint {
  int chart = -1;
  Vec coords;
};

struct ProductInfo;
struct CubeData;

struct ChartAtlas {
  std::string family = "explicit";
  std::vector<Chart> charts;
  std::vector<Gluing> gluings;
  std::vector<PExponent> declared_p;
  std::vector<std::vector<int>> chart_gluings;  // per chart: indices of incident gluings
  // Built-in spaces have convex charts (in-chart straight segments are geodesics
  // of the glued metric); user atlases leave this unset and pay the general path.
  bool convex_charts = false;
  std::shared_ptr<const ProductInfo> product;
  std::shared_ptr<const CubeData> cubes;

  int chart_index(const std::string& id) const;
  const Chart& chart(int i) const { return charts.at(static_cast<size_t>(i)); }
  bool declares(PExponent p) const;
};

using AtlasPtr = std::shared_ptr<const ChartAtlas>;

// ℓ^p product tag; charts of the product are pairwise products with index
// (i_left * right_chart_count + i_right).
struct ProductInfo {
  AtlasPtr left, right;
  PExponent built_for;
  int right_chart_count = 0;
  int left_of(int product_chart) const { return product_chart / right_chart_count; }
  int right_of(int product_chart) const { return product_chart % right_chart_count; }
};

// Combinatorial layer for cube complexes: chart corners name abstract vertices
// (binary corner order: bit i set ⇔ coordinate i equals 1).
struct CubeData {
  std::vector<std::string> vertex_names;
  std::vector<std::vector<int>> chart_corners;
};

// Structural + metric validation; throws InvalidGluing / MalformedInput.
void validate_atlas(const ChartAtlas& atlas);
void finalize_atlas(ChartAtlas& atlas);  // rebuilds chart_gluings, then validates

// All gluing-equivalent representatives of x (including x itself, canonicalized order).
std::vector<SpacePoint> orbit(const ChartAtlas& atlas, const SpacePoint& x, double tol = 1e-9);

SpacePoint canonicalize(const ChartAtlas& atlas, const SpacePoint& x);
std::optional<Vec> chart_rep(const ChartAtlas& atlas, const SpacePoint& x, int chart,
                             double tol = 1e-9);
bool points_equal(const ChartAtlas& atlas, const SpacePoint& a, const SpacePoint& b,
                  double tol = 1e-12);

double gluing_path_length(const ChartAtlas& atlas, const std::vector<SpacePoint>& pts,
                          const std::vector<std::string>& chart_seq, PExponent p);

std::string point_str(const ChartAtlas& atlas, const SpacePoint& x);

}  // namespace bicomb
