#pragma once

// Cube complexes carrying the piecewise-ℓ^p metric: unit box charts, one per
// maximal cube, glued along shared faces. Cubes are given as labeled corner
// lists (binary corner order: bit i set ⇔ coordinate i equals 1).

#include "bicomb/space.hpp"

namespace bicomb {

struct CubeComplex {
  std::vector<std::string> vertex_names;
  // Every cube of the complex as a sorted vertex-index set, closed under
  // faces (vertices appear as singletons).
  std::vector<std::vector<int>> cube_sets;
  AtlasPtr atlas;

  int vertex_index(const std::string& name) const;
  // Chart-resident location of a named vertex of a maximal cube.
  SpacePoint vertex_point(const std::string& name) const;
};

// Local complexity of a point: m the dimension of the carrier cube C(x)
// (the cube containing x in its interior) and n the extra dimension of the
// union of cubes containing C(x).
struct PointType {
  int n = 0;
  int m = 0;
  bool operator==(const PointType& o) const { return n == o.n && m == o.m; }
};

// Labeled corner lists -> validated complex. Rejects inputs that are not
// face-closed or where two cubes meet in anything but a common face.
CubeComplex build_cube_complex(const std::vector<std::string>& vertex_names,
                               const std::vector<std::vector<int>>& labeled_cubes);

CubeComplex cube_complex_interval();
CubeComplex cube_complex_square();
// Interval and square sharing one vertex: the square hangs off the end of
// the interval.
CubeComplex cube_complex_F();
// Five squares around a central vertex, consecutive squares sharing an edge.
CubeComplex cube_complex_F5();
// Chain of cubes glued corner-to-corner: entry 1 means an interval, entry √2
// a square crossed along its main diagonal.
CubeComplex cube_complex_chain(const std::vector<double>& xs);

PointType point_type(const CubeComplex& cx, const SpacePoint& x);

// ℓ^p product: charts are pairwise products (index i_left·|right charts| +
// i_right), every gluing of one factor lifted across every chart of the
// other.
AtlasPtr lp_product(const AtlasPtr& A, const AtlasPtr& B, PExponent p);

}  // namespace bicomb
