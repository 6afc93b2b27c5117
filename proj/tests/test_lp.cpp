#include <doctest.h>

#include <cmath>
#include <random>

#include "bicomb/lp.hpp"

using namespace bicomb;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec random_vec(std::mt19937_64& rng, int dim, double scale) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = (2.0 * unit(rng) - 1.0) * scale;
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("lp");

TEST_CASE("norm values") {
  CHECK(lp_norm(Vec{1, 1}, PExponent::infinity()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp_norm(Vec{1, 1}, PExponent::finite(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(lp_norm(Vec{3, 4}, PExponent::finite(1)) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(lp_norm(Vec{3, 4}, PExponent::finite(2)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(lp_norm(Vec{0, 0}, PExponent::finite(3)) == 0.0);
  CHECK(lp_norm(Vec{-2, 0, 1}, PExponent::infinity()) == 2.0);
}

TEST_CASE("lerp values") {
  Vec m = lerp(Vec{0, 0}, Vec{2, 2}, 0.5);
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m[1] == doctest::Approx(1.0));
  Vec x{0.3, -1.5};
  Vec same = lerp(x, x, 0.7);
  CHECK(same[0] == x[0]);
  CHECK(same[1] == x[1]);
  Vec q = lerp(Vec{0, 0}, Vec{1, 0}, 0.25);
  CHECK(q[0] == doctest::Approx(0.25));
  CHECK(q[1] == 0.0);
  CHECK_THROWS_AS(lerp(Vec{0, 0}, Vec{1, 2, 3}, 0.5), MalformedInput);
}

TEST_CASE("p exponent parsing and guards") {
  CHECK(PExponent::parse("inf").is_infinite());
  CHECK(PExponent::parse("2") == PExponent::finite(2));
  CHECK(PExponent::parse("1.5").value() == doctest::Approx(1.5));
  CHECK_THROWS_AS(PExponent::parse("0.5"), MalformedInput);
  CHECK_THROWS_AS(PExponent::parse("abc"), MalformedInput);
  CHECK_THROWS_AS(PExponent::finite(0.99), MalformedInput);
  CHECK(PExponent::infinity().str() == "inf");
  CHECK(PExponent::finite(2).str() == "2");
}

TEST_CASE("triangle inequality and homogeneity on sampled triples") {
  std::mt19937_64 rng(11);
  std::vector<PExponent> ps{PExponent::finite(1), PExponent::finite(1.7), PExponent::finite(2),
                            PExponent::finite(4), PExponent::infinity()};
  for (int iter = 0; iter < 200; ++iter) {
    int dim = 1 + static_cast<int>(rng() % kMaxDim);
    Vec a = random_vec(rng, dim, 10.0), b = random_vec(rng, dim, 10.0);
    double c = 2.0 * unit(rng) - 1.0;
    for (PExponent p : ps) {
      CHECK(lp_norm(a + b, p) <= lp_norm(a, p) + lp_norm(b, p) + 1e-12);
      CHECK(lp_norm(a * c, p) == doctest::Approx(std::fabs(c) * lp_norm(a, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("straight lines have constant speed in every norm") {
  std::mt19937_64 rng(12);
  for (int iter = 0; iter < 100; ++iter) {
    Vec a = random_vec(rng, 3, 5.0), b = random_vec(rng, 3, 5.0);
    double t = unit(rng), s = unit(rng);
    for (PExponent p : {PExponent::finite(1), PExponent::finite(2), PExponent::infinity()}) {
      double lhs = lp_norm(lerp(a, b, t) - lerp(a, b, s), p);
      double rhs = std::fabs(t - s) * lp_norm(b - a, p);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("norm non-increasing in p") {
  std::mt19937_64 rng(13);
  for (int iter = 0; iter < 100; ++iter) {
    Vec v = random_vec(rng, 4, 3.0);
    double n1 = lp_norm(v, PExponent::finite(1));
    double n2 = lp_norm(v, PExponent::finite(2));
    double n3 = lp_norm(v, PExponent::finite(3.5));
    double ni = lp_norm(v, PExponent::infinity());
    CHECK(n1 >= n2 - 1e-12);
    CHECK(n2 >= n3 - 1e-12);
    CHECK(n3 >= ni - 1e-12);
  }
}

TEST_SUITE_END();
