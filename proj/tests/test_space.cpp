#include <doctest.h>

#include <cmath>

#include "bicomb/catalog.hpp"
#include "bicomb/space.hpp"

using namespace bicomb;

TEST_SUITE_BEGIN("space");

TEST_CASE("canonicalize picks the least chart") {
  auto lsp2 = build_lsp(2);
  SpacePoint on_line{1, Vec{3, 0}};
  SpacePoint canon = canonicalize(*lsp2, on_line);
  CHECK(canon.chart == 0);
  CHECK(canon.coords[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(canon.coords[1] == 0.0);

  SpacePoint interior{0, Vec{1, 2}};
  SpacePoint same = canonicalize(*lsp2, interior);
  CHECK(same.chart == 0);
  CHECK(same.coords[0] == 1.0);
  CHECK(same.coords[1] == 2.0);

  auto lsp5 = build_lsp(5);
  SpacePoint diag{2, Vec{2, 2}};
  SpacePoint canon5 = canonicalize(*lsp5, diag);
  CHECK(canon5.chart == 1);
  CHECK(canon5.coords[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("canonicalize is idempotent and orbit-stable") {
  auto lsp4 = build_lsp(4);
  for (SpacePoint x : {SpacePoint{0, Vec{0, 0}}, SpacePoint{1, Vec{0, 3}}, SpacePoint{2, Vec{0, -2}},
                       SpacePoint{1, Vec{2.5, 0}}}) {
    SpacePoint c1 = canonicalize(*lsp4, x);
    SpacePoint c2 = canonicalize(*lsp4, c1);
    CHECK(c1.chart == c2.chart);
    CHECK(points_equal(*lsp4, c1, c2));
    for (const SpacePoint& rep : orbit(*lsp4, x))
      CHECK(points_equal(*lsp4, rep, x));
  }
  CHECK_THROWS_AS(canonicalize(*lsp4, SpacePoint{7, Vec{0, 0}}), MalformedInput);
}

TEST_CASE("origin of lsp4 lies in all three planes") {
  auto lsp4 = build_lsp(4);
  auto reps = orbit(*lsp4, SpacePoint{2, Vec{0, 0}});
  CHECK(reps.size() == 3);
  CHECK(reps[0].chart == 0);
  CHECK(reps[1].chart == 1);
  CHECK(reps[2].chart == 2);
  CHECK(chart_rep(*lsp4, SpacePoint{0, Vec{0, 0}}, 2).has_value());
  CHECK_FALSE(chart_rep(*lsp4, SpacePoint{0, Vec{1, 1}}, 1).has_value());
}

TEST_CASE("gluing path length") {
  auto lsp2 = build_lsp(2);
  SpacePoint x{0, Vec{0, 1}};
  CHECK(gluing_path_length(*lsp2, {x, x}, {"P1"}, PExponent::finite(2)) == 0.0);

  std::vector<SpacePoint> pts{{0, Vec{0, 1}}, {0, Vec{0, 0}}, {1, Vec{0, 1}}};
  std::vector<std::string> seq{"P1", "P2"};
  CHECK(gluing_path_length(*lsp2, pts, seq, PExponent::infinity()) == doctest::Approx(2.0));
  CHECK(gluing_path_length(*lsp2, pts, seq, PExponent::finite(2)) == doctest::Approx(2.0));

  std::vector<SpacePoint> broken{{0, Vec{0, 1}}, {1, Vec{0, 1}}};
  CHECK_THROWS_AS(gluing_path_length(*lsp2, broken, {"P1"}, PExponent::finite(2)), MalformedInput);
  CHECK_THROWS_AS(gluing_path_length(*lsp2, pts, {"P1"}, PExponent::finite(2)), MalformedInput);
}

TEST_CASE("points_equal uses canonical form") {
  auto lsp2 = build_lsp(2);
  CHECK(points_equal(*lsp2, SpacePoint{0, Vec{3, 0}}, SpacePoint{1, Vec{3, 0}}));
  CHECK(points_equal(*lsp2, SpacePoint{0, Vec{3, 0}}, SpacePoint{1, Vec{3 + 1e-13, 1e-13}}));
  CHECK_FALSE(points_equal(*lsp2, SpacePoint{0, Vec{3, 0.5}}, SpacePoint{1, Vec{3, 0.5}}));
  CHECK_FALSE(points_equal(*lsp2, SpacePoint{0, Vec{3, 0}}, SpacePoint{0, Vec{3, 1e-6}}));
}

TEST_CASE("invalid gluings are rejected with the gluing name") {
  ChartAtlas atlas;
  atlas.family = "explicit";
  atlas.declared_p = {PExponent::finite(2)};
  Chart p1, p2;
  p1.id = "P1";
  p2.id = "P2";
  atlas.charts = {p1, p2};
  Gluing g;
  g.name = "bad-line";
  g.chart_a = 0;
  g.chart_b = 1;
  g.locus_a.base = Vec{0, 0};
  g.locus_a.dirs = {Vec{1, 0}};
  g.locus_b.base = Vec{0, 0};
  g.locus_b.dirs = {Vec{2, 0}};  // doubles the induced metric
  g.locus_a.plo = g.locus_b.plo = {-std::numeric_limits<double>::infinity()};
  g.locus_a.phi = g.locus_b.phi = {std::numeric_limits<double>::infinity()};
  atlas.gluings = {g};
  try {
    finalize_atlas(atlas);
    FAIL("expected InvalidGluing");
  } catch (const InvalidGluing& e) {
    CHECK(std::string(e.what()).find("bad-line") != std::string::npos);
  }
}

TEST_CASE("point formatting") {
  auto lsp2 = build_lsp(2);
  CHECK(point_str(*lsp2, SpacePoint{0, Vec{1.5, -2}}) == "P1:1.5,-2");
}

TEST_SUITE_END();
