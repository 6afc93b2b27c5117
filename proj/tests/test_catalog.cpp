#include <doctest.h>

#include <cmath>
#include <set>

#include "bicomb/catalog.hpp"
#include "bicomb/spacespec.hpp"

using namespace bicomb;

TEST_SUITE_BEGIN("catalog");

TEST_CASE("model spaces have the stated shapes") {
  CHECK(build_lsp(1)->charts.size() == 1);
  CHECK(build_lsp(1)->gluings.empty());
  CHECK(build_lsp(2)->charts.size() == 2);
  CHECK(build_lsp(3)->gluings.size() == 1);
  auto lsp4 = build_lsp(4);
  CHECK(lsp4->charts.size() == 3);
  CHECK(lsp4->gluings.size() == 2);
  CHECK(build_lsp(5)->gluings.size() == 2);
  CHECK_THROWS_AS(build_lsp(6), MalformedInput);
  for (int k = 1; k <= 5; ++k)
    for (PExponent p : {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()})
      CHECK(build_lsp(k)->declares(p));
}

TEST_CASE("patch growth by depth") {
  CHECK(build_ck_patch(90, 0)->charts.size() == 1);
  CHECK(build_ck_patch(90, 0)->gluings.empty());
  CHECK(build_ck_patch(90, 1)->charts.size() == 7);
  CHECK(build_ck_patch(45, 1)->charts.size() == 7);
  auto patch = build_ck_patch(90, 2);
  CHECK(patch->charts.size() == 19);
  CHECK(patch->gluings.size() == 18);
  CHECK_THROWS_AS(build_ck_patch(30, 1), MalformedInput);
  CHECK_THROWS_AS(build_ck_patch(90, -1), MalformedInput);
}

TEST_CASE("every patch point lies in at most three planes") {
  for (int angle : {45, 90}) {
    auto patch = build_ck_patch(angle, 2);
    // Crossing points of the root plane: one horizontal and one crossing line.
    for (double x : {-1.0, 0.0, 1.0})
      for (double y : {-1.0, 0.0, 1.0}) {
        auto reps = orbit(*patch, SpacePoint{0, Vec{x, y}});
        CHECK(reps.size() <= 3);
      }
  }
}

TEST_CASE("block sequence partial sums") {
  BlockSequence seq = BlockSequence::standard();
  CHECK(seq.total() == 4681);
  CHECK(seq.x(1) == 1.0);
  CHECK(seq.x(2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(seq.x(9) == doctest::Approx(std::sqrt(2.0)));
  CHECK(seq.x(10) == 1.0);
  CHECK(seq.partial_sum(0) == 0.0);
  CHECK(seq.partial_sum(1) == 1.0);
  CHECK(seq.partial_sum(9) == doctest::Approx(1.0 + 8.0 * std::sqrt(2.0)));
  CHECK(seq.partial_sum(10) == doctest::Approx(2.0 + 8.0 * std::sqrt(2.0)));
}

TEST_CASE("halfplane strips accumulate block widths") {
  BlockSequence seq = BlockSequence::standard();
  auto hp_inf = build_halfplane(seq, 12, PExponent::infinity());
  CHECK(hp_inf->charts.size() == 12);
  CHECK(hp_inf->gluings.size() == 11);
  CHECK(hp_inf->chart(11).hi[0] == doctest::Approx(12.0));

  auto hp_2 = build_halfplane(seq, 12, PExponent::finite(2));
  CHECK(hp_2->chart(11).hi[0] == doctest::Approx(seq.partial_sum(12)));
  CHECK(hp_2->declares(PExponent::finite(2)));
  CHECK_FALSE(hp_2->declares(PExponent::infinity()));
}

TEST_CASE("space specs round-trip byte-stably") {
  for (const char* token : {"lsp1", "lsp4", "ck90_1", "ck45_2", "f", "f5", "square", "interval",
                            "fxi", "halfplane"}) {
    std::string doc = token_space_json(token);
    std::string once = canonical_space_json(doc);
    std::string twice = canonical_space_json(once);
    CHECK(once == twice);
    CHECK(space_from_json(once) != nullptr);
  }
}

TEST_CASE("explicit chart documents build and round-trip") {
  std::string doc = R"({
    "charts": [{"id": "P1"}, {"id": "P2"}],
    "gluings": [{"chartA": "P1", "chartB": "P2",
                 "lineA": {"base": [0, 0], "dir": [1, 0]},
                 "lineB": {"base": [0, 0], "dir": [1, 0]}}],
    "p": ["1", "2", "inf"]
  })";
  auto atlas = space_from_json(doc);
  CHECK(atlas->charts.size() == 2);
  CHECK(atlas->gluings.size() == 1);
  std::string once = canonical_space_json(doc);
  CHECK(canonical_space_json(once) == once);

  std::string cubes = R"({
    "vertices": ["e", "o", "x", "y", "xy"],
    "cubes": [["e", "o"], ["o", "x", "y", "xy"], ["e"], ["o"], ["x"], ["y"], ["xy"],
              ["o", "x"], ["o", "y"], ["x", "xy"], ["y", "xy"]]
  })";
  auto fx = space_from_json(cubes);
  CHECK(fx->charts.size() == 2);
  CHECK(canonical_space_json(canonical_space_json(cubes)) == canonical_space_json(cubes));
}

TEST_CASE("unknown families are rejected") {
  CHECK_THROWS_AS(space_from_token("lsp9"), MalformedInput);
  CHECK_THROWS_AS(space_from_token("torus"), MalformedInput);
  CHECK_THROWS_AS(space_from_json("{\"family\": \"nope\"}"), MalformedInput);
  CHECK_THROWS_AS(space_from_json("not json"), MalformedInput);
}

TEST_SUITE_END();
