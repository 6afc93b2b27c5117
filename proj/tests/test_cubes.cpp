#include <doctest.h>

#include <cmath>

#include "bicomb/cubes.hpp"

using namespace bicomb;

TEST_SUITE_BEGIN("cubes");

TEST_CASE("built complexes have the stated maximal cubes") {
  CHECK(cube_complex_square().atlas->charts.size() == 1);
  CHECK(cube_complex_interval().atlas->charts.size() == 1);

  CubeComplex f = cube_complex_F();
  CHECK(f.atlas->charts.size() == 2);
  CHECK(f.atlas->chart(0).id == "I0");
  CHECK(f.atlas->chart(1).id == "Q0");
  CHECK(f.atlas->gluings.size() == 1);
  // The shared vertex o is the end of the interval and the square corner.
  CHECK(points_equal(*f.atlas, SpacePoint{0, Vec{1}}, SpacePoint{1, Vec{0, 0}}));
  CHECK_FALSE(points_equal(*f.atlas, SpacePoint{0, Vec{0}}, SpacePoint{1, Vec{0, 0}}));

  CubeComplex f5 = cube_complex_F5();
  CHECK(f5.atlas->charts.size() == 5);
  // Five edge gluings between consecutive squares plus vertex contacts.
  int edges = 0, vertices = 0;
  for (const Gluing& g : f5.atlas->gluings)
    (g.locus_a.nparams() == 1 ? edges : vertices) += 1;
  CHECK(edges == 5);
  CHECK(vertices == 5);
  // The central vertex lies on all five squares.
  CHECK(orbit(*f5.atlas, f5.vertex_point("z")).size() == 5);
}

TEST_CASE("chain of cubes glues corner to corner") {
  CubeComplex chain = cube_complex_chain({1.0, std::sqrt(2.0), std::sqrt(2.0)});
  CHECK(chain.atlas->charts.size() == 3);
  CHECK(chain.atlas->chart(0).id == "I0");
  CHECK(chain.atlas->chart(1).id == "Q0");
  CHECK(chain.atlas->chart(2).id == "Q1");
  CHECK(chain.atlas->gluings.size() == 2);
  CHECK(points_equal(*chain.atlas, SpacePoint{0, Vec{1}}, SpacePoint{1, Vec{0, 0}}));
  CHECK(points_equal(*chain.atlas, SpacePoint{1, Vec{1, 1}}, SpacePoint{2, Vec{0, 0}}));
  CHECK_THROWS_AS(cube_complex_chain({1.0, 3.0}), MalformedInput);
  CHECK_THROWS_AS(cube_complex_chain({}), MalformedInput);
}

TEST_CASE("point types") {
  CubeComplex sq = cube_complex_square();
  CHECK(point_type(sq, SpacePoint{0, Vec{0.4, 0.7}}) == PointType{0, 2});
  CHECK(point_type(sq, SpacePoint{0, Vec{0.5, 0.0}}) == PointType{1, 1});
  CHECK(point_type(sq, SpacePoint{0, Vec{0.0, 0.0}}) == PointType{2, 0});

  CubeComplex f = cube_complex_F();
  CHECK(point_type(f, f.vertex_point("o")) == PointType{2, 0});
  CHECK(point_type(f, SpacePoint{0, Vec{0.5}}) == PointType{0, 1});
  CHECK(point_type(f, f.vertex_point("e")) == PointType{1, 0});

  CubeComplex f5 = cube_complex_F5();
  CHECK(point_type(f5, f5.vertex_point("z")) == PointType{2, 0});
  CHECK(point_type(f5, SpacePoint{0, Vec{0.5, 0.0}}) == PointType{1, 1});
}

TEST_CASE("malformed complexes are rejected") {
  // Missing edge faces.
  CHECK_THROWS_AS(build_cube_complex({"a", "b", "c", "d"}, {{0, 1, 2, 3}, {0}, {1}, {2}, {3}}),
                  MalformedInput);
  // Duplicate cube.
  CHECK_THROWS_AS(build_cube_complex({"a", "b"}, {{0, 1}, {1, 0}, {0}, {1}}), MalformedInput);
  // Two squares sharing two opposite corners: not a common face.
  auto overlapping = [] {
    std::vector<std::vector<int>> cubes{{0, 1, 2, 3}, {0, 4, 5, 3}, {0, 1}, {0, 2}, {1, 3},
                                        {2, 3},       {0, 4},       {0, 5}, {4, 3}, {5, 3}};
    for (int v = 0; v < 6; ++v) cubes.push_back({v});
    build_cube_complex({"p", "q", "r", "s", "t", "u"}, cubes);
  };
  CHECK_THROWS_AS(overlapping(), MalformedInput);
}

TEST_CASE("products lift charts and gluings") {
  auto f = cube_complex_F().atlas;
  auto i = cube_complex_interval().atlas;
  auto fxi = lp_product(f, i, PExponent::finite(2));
  CHECK(fxi->charts.size() == 2);
  CHECK(fxi->chart(0).id == "I0.I0");
  CHECK(fxi->chart(1).id == "Q0.I0");
  CHECK(fxi->chart(0).dim == 2);
  CHECK(fxi->chart(1).dim == 3);
  CHECK(fxi->gluings.size() == 1);
  CHECK(fxi->gluings[0].locus_a.nparams() == 1);  // hinge vertex × interval
  CHECK(fxi->product != nullptr);
  CHECK(fxi->product->left_of(1) == 1);
  CHECK(fxi->product->right_of(1) == 0);
  // Hinge fiber: (interval end, h) ~ (square corner, h).
  CHECK(points_equal(*fxi, SpacePoint{0, Vec{1, 0.3}}, SpacePoint{1, Vec{0, 0, 0.3}}));
  CHECK_FALSE(points_equal(*fxi, SpacePoint{0, Vec{1, 0.3}}, SpacePoint{1, Vec{0, 0, 0.4}}));

  for (PExponent p : {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()})
    CHECK(fxi->declares(p));

  auto plane_like = lp_product(i, i, PExponent::infinity());
  CHECK(plane_like->charts.size() == 1);
  CHECK(plane_like->chart(0).dim == 2);
  CHECK(plane_like->gluings.empty());
}

TEST_SUITE_END();
