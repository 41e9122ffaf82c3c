#include <cmath>
#include <set>

#include "doctest.h"
#include "socnav/common.hpp"
#include "socnav/rng.hpp"

using namespace socnav;

TEST_CASE("vec2 arithmetic") {
  const Vec2 a{3.0, 4.0}, b{-1.0, 2.0};
  CHECK((a + b) == Vec2{2.0, 6.0});
  CHECK((a - b) == Vec2{4.0, 2.0});
  CHECK((a * 2.0) == Vec2{6.0, 8.0});
  CHECK((2.0 * a) == Vec2{6.0, 8.0});
  CHECK((a / 2.0) == Vec2{1.5, 2.0});
  CHECK(a.dot(b) == doctest::Approx(5.0));
  CHECK(a.cross(b) == doctest::Approx(10.0));
  CHECK(a.norm() == doctest::Approx(5.0));
  CHECK(a.squared_norm() == doctest::Approx(25.0));
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(16.0 + 4.0)));
  Vec2 c = a;
  c += b;
  CHECK(c == Vec2{2.0, 6.0});
  c -= b;
  CHECK(c == a);
}

TEST_CASE("vec2 perp rotates +90 degrees") {
  const Vec2 x{1.0, 0.0};
  CHECK(x.perp() == Vec2{0.0, 1.0});
  CHECK(x.perp().perp() == Vec2{-1.0, 0.0});
  const Vec2 v{2.0, 5.0};
  CHECK(v.dot(v.perp()) == doctest::Approx(0.0));
  CHECK(v.cross(v.perp()) > 0.0);  // counter-clockwise
}

TEST_CASE("vec2 rotated") {
  const Vec2 x{1.0, 0.0};
  const Vec2 r = x.rotated(M_PI / 2.0);
  CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.y == doctest::Approx(1.0));
  const Vec2 half = x.rotated(M_PI / 6.0);
  CHECK(half.x == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(half.y == doctest::Approx(0.5));
}

TEST_CASE("normalized handles length") {
  CHECK(Vec2{3.0, 4.0}.normalized().norm() == doctest::Approx(1.0));
}

TEST_CASE("sigmoid midpoint and symmetry") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(2.0) + sigmoid(-2.0) == doctest::Approx(1.0));
  CHECK(sigmoid(10.0) > 0.999);
}

TEST_CASE("angle_between basics") {
  CHECK(angle_between({1, 0}, {0, 1}) == doctest::Approx(M_PI / 2));
  CHECK(angle_between({1, 0}, {5, 0}) == doctest::Approx(0.0));
  CHECK(angle_between({1, 0}, {-2, 0}) == doctest::Approx(M_PI));
  CHECK(angle_between({1, 1}, {-1, 1}) == doctest::Approx(M_PI / 2));
  CHECK_THROWS_AS(angle_between({0, 0}, {1, 0}), ZeroVectorError);
  CHECK_THROWS_AS(angle_between({1, 0}, {0, 0}), ZeroVectorError);
}

TEST_CASE("angle_between is clamp-safe for near-parallel vectors") {
  // Nearly identical unit vectors can push the cosine epsilon above 1.
  const Vec2 a{1.0, 1e-9};
  const Vec2 b{1.0, -1e-9};
  const double got = angle_between(a, b);
  CHECK(got >= 0.0);
  CHECK(got < 1e-6);
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("abc") == 0xe71fa2190541574bull);
}

TEST_CASE("hex64 formatting") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("deg_to_rad") {
  CHECK(deg_to_rad(180.0) == doctest::Approx(M_PI));
  CHECK(deg_to_rad(45.0) == doctest::Approx(M_PI / 4));
}

TEST_CASE("rng determinism and stream separation") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform(), vb = b.uniform(), vc = c.uniform();
    all_equal = all_equal && (va == vb);
    any_diff = any_diff || (va != vc);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng uniform range") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("rng uniform_index stays in range and covers values") {
  Rng rng(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto k = rng.uniform_index(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("rng normal moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng scaled normal and truncation") {
  Rng rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.normal(3.0, 0.5);
  CHECK(sum / n == doctest::Approx(3.0).epsilon(0.01));
  for (int i = 0; i < 5000; ++i) {
    const double v = rng.truncated_normal(1.0, 0.2, 0.4, 1.6);
    CHECK(v >= 0.4);
    CHECK(v <= 1.6);
  }
}

TEST_CASE("rng fork gives distinct but deterministic streams") {
  Rng a(5), b(5);
  Rng fa = a.fork("data");
  Rng fb = b.fork("data");
  CHECK(fa.uniform() == fb.uniform());
  Rng c(5);
  Rng fc = c.fork("other");
  Rng d(5);
  Rng fd = d.fork("data");
  CHECK(fc.uniform() != fd.uniform());
}

TEST_CASE("derive_seed is stable and name-sensitive") {
  CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
  CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
  CHECK(derive_seed(1, "x") != derive_seed(2, "x"));
}

TEST_CASE("rng root_seed is preserved") {
  Rng rng(777);
  rng.uniform();
  rng.normal();
  CHECK(rng.root_seed() == 777);
}
