#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "socnav/metrics.hpp"
#include "socnav/rng.hpp"
#include "worlds.hpp"

using namespace socnav;

namespace {

SemanticGrid random_grid(Rng& rng, int w, int h, double density, double res) {
  SemanticGrid g;
  g.width = w;
  g.height = h;
  g.resolution = res;
  g.origin = {0.0, 0.0};
  g.cells.assign(static_cast<std::size_t>(w) * h, CellLabel::kTraversable);
  for (auto& c : g.cells) {
    if (rng.uniform() < density) c = CellLabel::kNonTraversable;
  }
  return g;
}

std::vector<int> open_cells(const SemanticGrid& g) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(g.cells.size()); ++i) {
    if (g.cells[i] == CellLabel::kTraversable) idx.push_back(i);
  }
  return idx;
}

}  // namespace

TEST_CASE("lattice geodesics match an array-scan shortest-path oracle") {
  Rng rng(2024);
  int compared = 0, unreachable = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 6 + static_cast<int>(rng.uniform_index(12));
    const int h = 6 + static_cast<int>(rng.uniform_index(12));
    const double res = 0.25 + 0.5 * rng.uniform();
    const SemanticGrid g = random_grid(rng, w, h, 0.3, res);
    const auto open = open_cells(g);
    if (open.size() < 2) continue;
    for (int q = 0; q < 5; ++q) {
      const int a = open[rng.uniform_index(open.size())];
      const int b = open[rng.uniform_index(open.size())];
      const int ax = a % w, ay = a / w, bx = b % w, by = b / w;
      const double expected = oracles::dijkstra_lattice(g, ax, ay, bx, by);
      const Vec2 pa = g.cell_center(ax, ay);
      const Vec2 pb = g.cell_center(bx, by);
      if (std::isinf(expected)) {
        CHECK_THROWS_AS(lattice_geodesic(g, pa, pb), NoPathError);
        ++unreachable;
      } else {
        CHECK(lattice_geodesic(g, pa, pb) ==
              doctest::Approx(expected).epsilon(1e-9));
        ++compared;
      }
    }
  }
  // The sweep must have exercised both outcomes.
  CHECK(compared > 100);
  CHECK(unreachable > 5);
}

TEST_CASE("the geodesic map agrees with point queries") {
  Rng rng(7);
  const SemanticGrid g = random_grid(rng, 14, 11, 0.25, 0.5);
  const auto open = open_cells(g);
  REQUIRE(open.size() >= 2);
  const int a = open[0];
  const int ax = a % g.width, ay = a / g.width;
  const std::vector<double> dist = geodesic_map(g, ax, ay);
  REQUIRE(dist.size() == g.cells.size());
  CHECK(dist[a] == 0.0);
  for (const int b : open) {
    const Vec2 pb = g.cell_center(b % g.width, b / g.width);
    if (std::isinf(dist[b])) {
      CHECK_THROWS_AS(lattice_geodesic(g, g.cell_center(ax, ay), pb),
                      NoPathError);
    } else {
      CHECK(lattice_geodesic(g, g.cell_center(ax, ay), pb) ==
            doctest::Approx(dist[b]).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(geodesic_map(g, -1, 0), ValidationError);
}

TEST_CASE("diagonal moves may not cut corners") {
  SemanticGrid g;
  g.width = 2;
  g.height = 2;
  g.resolution = 1.0;
  g.origin = {0.0, 0.0};
  g.cells = {CellLabel::kTraversable, CellLabel::kNonTraversable,
             CellLabel::kNonTraversable, CellLabel::kTraversable};
  // Both orthogonal companions blocked: the diagonal pair is disconnected.
  CHECK_THROWS_AS(lattice_geodesic(g, {0.5, 0.5}, {1.5, 1.5}), NoPathError);

  // One companion open: the move must still go around, costing 2 straights.
  g.cells[1] = CellLabel::kTraversable;
  CHECK(lattice_geodesic(g, {0.5, 0.5}, {1.5, 1.5}) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // Fully open: the diagonal shortcut is allowed.
  g.cells[2] = CellLabel::kTraversable;
  CHECK(lattice_geodesic(g, {0.5, 0.5}, {1.5, 1.5}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("geodesic endpoint validation") {
  const SemanticGrid g = worlds::corridor_grid();
  CHECK_THROWS_AS(lattice_geodesic(g, {-5.0, 3.0}, {10.0, 3.0}), NoPathError);
  CHECK_THROWS_AS(lattice_geodesic(g, {2.0, 3.0}, {1000.0, 3.0}), NoPathError);
  // A wall cell is not on the traversable lattice.
  CHECK_THROWS_AS(lattice_geodesic(g, {0.1, 0.1}, {10.0, 3.0}), NoPathError);
  // Two points inside the same cell are zero distance apart.
  CHECK(lattice_geodesic(g, {10.1, 3.1}, {10.4, 3.4}) == 0.0);
}

TEST_CASE("orientation error takes the worst step, then averages samples") {
  const std::vector<Vec2> straight = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  CHECK(maoe({straight}, {straight}) == 0.0);

  // One step bends by 45 degrees: that step dominates.
  const std::vector<Vec2> bent = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}};
  CHECK(maoe({bent}, {straight}) ==
        doctest::Approx(deg_to_rad(45.0)).epsilon(1e-12));

  // Mean over samples: {pi/2, 0} -> pi/4.
  const std::vector<Vec2> up = {{0.0, 0.0}, {0.0, 1.0}, {0.0, 2.0}};
  CHECK(maoe({up, straight}, {straight, straight}) ==
        doctest::Approx(0.5 * deg_to_rad(90.0)).epsilon(1e-12));

  CHECK_THROWS_AS(maoe({straight}, {straight, straight}), ShapeMismatchError);
  CHECK_THROWS_AS(maoe({straight}, {{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}}}),
                  ShapeMismatchError);
  CHECK_THROWS_AS(maoe({{Vec2{0.0, 0.0}}}, {{Vec2{0.0, 0.0}}}),
                  TooShortError);
  CHECK_THROWS_AS(maoe({}, {}), ValidationError);
  // A stalled step has no heading.
  const std::vector<Vec2> stalled = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(maoe({stalled}, {straight}), ZeroVectorError);
}

TEST_CASE("success criterion honors radius and collision budget") {
  CHECK(success_criterion(2.9, 0));
  CHECK(success_criterion(3.0, 2));   // boundary radius counts
  CHECK_FALSE(success_criterion(3.1, 0));
  CHECK_FALSE(success_criterion(1.0, 3));  // third collision disqualifies
  CHECK(success_criterion(4.0, 0, 5.0, 1));
  CHECK_FALSE(success_criterion(4.0, 1, 5.0, 1));
}

TEST_CASE("route completion and per-episode path efficiency") {
  EpisodeResult r;
  r.success = true;
  r.geodesic_start_goal = 10.0;
  r.geodesic_start_final = 5.0;
  r.d_actual = 12.5;
  CHECK(route_completion(r) == doctest::Approx(0.5));
  CHECK(episode_spl(r) == doctest::Approx(0.8));

  r.geodesic_start_final = 15.0;  // wandered past the goal distance
  CHECK(route_completion(r) == 1.0);

  // The executed path can never beat the geodesic in the ratio.
  r.d_actual = 8.0;
  CHECK(episode_spl(r) == 1.0);

  r.success = false;
  CHECK(episode_spl(r) == 0.0);

  r.success = true;
  r.geodesic_start_goal = 0.0;
  CHECK_THROWS_AS(route_completion(r), DegenerateEpisodeError);
  CHECK_THROWS_AS(episode_spl(r), DegenerateEpisodeError);
}

TEST_CASE("batch path efficiency is bounded by the success rate") {
  SUBCASE("hand values") {
    const double v = spl({true, false, true}, {10.0, 10.0, 8.0},
                         {12.5, 20.0, 8.0});
    CHECK(v == doctest::Approx((0.8 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(spl({true}, {10.0, 5.0}, {10.0}), ShapeMismatchError);
    CHECK_THROWS_AS(spl({}, {}, {}), ValidationError);
    CHECK_THROWS_AS(spl({true}, {0.0}, {5.0}), ValidationError);
    // Failed episodes may carry degenerate lengths without tripping checks.
    CHECK(spl({false}, {0.0}, {0.0}) == 0.0);
  }

  SUBCASE("random batches") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform_index(12));
      std::vector<bool> succ(n);
      std::vector<double> shortest(n), actual(n);
      double sr = 0.0;
      for (int i = 0; i < n; ++i) {
        succ[i] = rng.uniform() < 0.6;
        sr += succ[i] ? 1.0 : 0.0;
        shortest[i] = 0.5 + 20.0 * rng.uniform();
        actual[i] = 0.1 + 30.0 * rng.uniform();
      }
      sr /= n;
      const double v = spl(succ, shortest, actual);
      CHECK(v >= 0.0);
      CHECK(v <= sr + 1e-12);
    }
  }
}

TEST_CASE("compliance rates are zero on failure and vacuous on no motion") {
  EpisodeResult r;
  r.success = false;
  r.d_actual = 10.0;
  r.d_compliant = 10.0;
  r.t_actual = 10.0;
  r.t_compliant = 10.0;
  CHECK(compliance_rates(r) == std::pair<double, double>{0.0, 0.0});

  r.success = true;
  r.d_compliant = 7.5;
  r.t_compliant = 2.5;
  const auto [dcr, tcr] = compliance_rates(r);
  CHECK(dcr == doctest::Approx(0.75));
  CHECK(tcr == doctest::Approx(0.25));

  EpisodeResult still;
  still.success = true;
  CHECK(compliance_rates(still) == std::pair<double, double>{1.0, 1.0});
}

TEST_CASE("aggregation averages per-episode metrics") {
  EpisodeResult e1;
  e1.success = true;
  e1.geodesic_start_goal = 10.0;
  e1.geodesic_start_final = 10.0;
  e1.d_actual = 12.5;
  e1.d_compliant = 10.0;
  e1.t_actual = 10.0;
  e1.t_compliant = 8.0;
  e1.maoe_rad = 0.2;

  EpisodeResult e2;
  e2.success = false;
  e2.geodesic_start_goal = 10.0;
  e2.geodesic_start_final = 4.0;
  e2.d_actual = 6.0;
  e2.d_compliant = 6.0;
  e2.t_actual = 6.0;
  e2.t_compliant = 6.0;

  EpisodeResult e3;
  e3.success = true;
  e3.geodesic_start_goal = 8.0;
  e3.geodesic_start_final = 8.0;
  e3.d_actual = 8.0;
  e3.d_compliant = 8.0;
  e3.t_actual = 4.0;
  e3.t_compliant = 4.0;

  const MetricsReport rep = aggregate_metrics({e1, e2, e3});
  CHECK(rep.n_episodes == 3);
  CHECK(rep.sr == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rep.rc == doctest::Approx((1.0 + 0.4 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(rep.spl == doctest::Approx((0.8 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(rep.dcr == doctest::Approx((0.8 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(rep.tcr == doctest::Approx((0.8 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
  // Only episodes with an orientation error contribute to its mean.
  CHECK(rep.maoe_rad == doctest::Approx(0.2).epsilon(1e-12));

  const MetricsReport empty = aggregate_metrics({});
  CHECK(empty.n_episodes == 0);
  CHECK(empty.sr == 0.0);
  CHECK(std::isnan(empty.maoe_rad));
}
