#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "fnl/funnel.hpp"

using namespace fnl;

namespace {

// Leftmost/rightmost set cell centers of a 1D slice.
std::pair<double, double> span_1d(const GridSet& s) {
  double lo = 1e300, hi = -1e300;
  for (int ix = 0; ix < s.grid.extents[0]; ++ix)
    if (s.mask[ix]) {
      lo = std::min(lo, s.grid.center(ix, 0)[0]);
      hi = std::max(hi, s.grid.center(ix, 0)[0]);
    }
  return {lo, hi};
}

GridSet interval_set(const Grid& g, double lo, double hi) {
  return rasterize(g, [=](Vec2 p) { return p[0] >= lo && p[0] <= hi; });
}

}  // namespace

TEST_CASE("funnel: constant translation lands the seed on the exact offset") {
  Grid g = Grid::box(-2, 2, 128);
  GridSet seed = ball_set(g, {-0.3, 0.1}, 0.3);
  SingletonProvider field({0.5, -0.25}, 2);
  double dt = g.spacing / field.speed_bound();
  Funnel f = propagate_funnel(field, seed, 0.0, 0.8, dt, Direction::Forward);

  CHECK(f.times.front() == doctest::Approx(0.0));
  CHECK(f.times.back() == doctest::Approx(0.8));
  GridSet target = ball_set(g, {-0.3 + 0.4, 0.1 - 0.2}, 0.3);
  CHECK(hausdorff_distance(f.slices.back(), target) <= 1.5 * g.spacing);
  // Every intermediate slice sits on the track too.
  const size_t mid = f.slices.size() / 2;
  const double tm = f.times[mid];
  GridSet ongoing = ball_set(g, {-0.3 + 0.5 * tm, 0.1 - 0.25 * tm}, 0.3);
  CHECK(hausdorff_distance(f.slices[mid], ongoing) <= 1.5 * g.spacing);
}

TEST_CASE("funnel: 1D isotropic growth moves both endpoints at speed c") {
  Grid g = Grid::line(-1.5, 1.5, 384);
  GridSet seed = interval_set(g, -0.2, 0.2);
  IsotropicProvider field(0.4, 1);
  Funnel f = propagate_funnel(field, seed, 0.0, 1.0, g.spacing / 0.4, Direction::Forward);

  auto [lo, hi] = span_1d(f.slices.back());
  CHECK(std::abs(lo + 0.6) <= 1.5 * g.spacing);
  CHECK(std::abs(hi - 0.6) <= 1.5 * g.spacing);
  CHECK(hausdorff_distance(f.slices.back(), interval_set(g, -0.6, 0.6)) <= 1.5 * g.spacing);
}

TEST_CASE("funnel: 2D isotropic cone has the right radius and measure") {
  Grid g = Grid::box(-2, 2, 256);
  GridSet seed = ball_set(g, {0, 0}, 0.25);
  IsotropicProvider field(0.5, 2);
  Funnel f = propagate_funnel(field, seed, 0.0, 0.8, g.spacing / 0.5, Direction::Forward);

  const double rT = 0.25 + 0.5 * 0.8;
  CHECK(hausdorff_distance(f.slices.back(), ball_set(g, {0, 0}, rT)) <= 1.5 * g.spacing);
  CHECK(set_diameter(f.slices.back()) == doctest::Approx(2 * rT).epsilon(0.03));
  CHECK(measure(f.slices.back()) == doctest::Approx(M_PI * rT * rT).epsilon(0.03));
  // Slices only grow.
  for (size_t i = 0; i + 1 < f.slices.size(); ++i)
    CHECK(subset_of(f.slices[i], f.slices[i + 1]));
}

TEST_CASE("funnel: backward run ends on the seed and grows into the past") {
  Grid g = Grid::box(-2, 2, 128);
  GridSet seed = ball_set(g, {0.2, -0.1}, 0.3);
  IsotropicProvider field(0.4, 2);
  Funnel f = propagate_funnel(field, seed, 0.0, 0.75, g.spacing / 0.4, Direction::Backward);

  CHECK(f.direction == Direction::Backward);
  REQUIRE(f.times.size() == f.slices.size());
  CHECK(f.times.front() == doctest::Approx(0.0));
  CHECK(f.times.back() == doctest::Approx(0.75));
  // The final slice is the seed itself (same mask), earlier slices dilate it.
  for (size_t i = 0; i < seed.mask.size(); ++i) CHECK(f.slices.back().mask[i] == seed.mask[i]);
  GridSet start = ball_set(g, {0.2, -0.1}, 0.3 + 0.4 * 0.75);
  CHECK(hausdorff_distance(f.slices.front(), start) <= 1.5 * g.spacing);
  for (size_t i = 0; i + 1 < f.slices.size(); ++i)
    CHECK(subset_of(f.slices[i + 1], f.slices[i]));
}

TEST_CASE("funnel: nested seeds stay nested under one field") {
  Grid g = Grid::line(-1.5, 1.5, 256);
  GridSet small = interval_set(g, -0.1, 0.15);
  GridSet big = interval_set(g, -0.3, 0.3);
  FluxModel flux = FluxModel::burgers(1.0);
  BoundsEnvelope env = BoundsEnvelope::constant(-0.4, 0.5);
  double dt = g.spacing / flux.speed_bound;
  Funnel fs = propagate_funnel(flux, small, env, 0.0, 0.4, dt, Direction::Forward);
  Funnel fb = propagate_funnel(flux, big, env, 0.0, 0.4, dt, Direction::Forward);
  REQUIRE(fs.slices.size() == fb.slices.size());
  for (size_t i = 0; i < fs.slices.size(); ++i) CHECK(subset_of(fs.slices[i], fb.slices[i]));
}

TEST_CASE("funnel: wider envelope produces a wider funnel") {
  Grid g = Grid::line(-1.5, 1.5, 256);
  GridSet seed = interval_set(g, -0.15, 0.15);
  FluxModel flux = FluxModel::burgers(1.0);
  BoundsEnvelope narrow = BoundsEnvelope::constant(-0.2, 0.2);
  BoundsEnvelope wide = BoundsEnvelope::constant(-0.5, 0.5);
  double dt = g.spacing / flux.speed_bound;
  Funnel fn = propagate_funnel(flux, seed, narrow, 0.0, 0.4, dt, Direction::Forward);
  Funnel fw = propagate_funnel(flux, seed, wide, 0.0, 0.4, dt, Direction::Forward);
  REQUIRE(fn.slices.size() == fw.slices.size());
  // Velocity sets nest with a 0.3 margin per endpoint, so any sampling slack
  // is swamped after the first step; allow one flipped cell on the first.
  for (size_t i = 1; i < fn.slices.size(); ++i) {
    const double excess = measure(set_difference(fn.slices[i], fw.slices[i]));
    CHECK(excess <= (i == 1 ? g.cell_volume() : 0.0));
  }
}

TEST_CASE("funnel: burgers backward slice reaches the exact dependence interval") {
  Grid g = Grid::line(-1.5, 1.5, 512);
  GridSet seed = interval_set(g, -0.1, 0.1);
  FluxModel flux = FluxModel::burgers(1.0);
  BoundsEnvelope env = BoundsEnvelope::constant(-0.3, 0.5);
  Funnel f = propagate_funnel(flux, seed, env, 0.0, 0.4, g.spacing / flux.speed_bound,
                              Direction::Backward);
  // Backward reach of [x0,x1] under velocities [a,b] over a span s is
  // [x0 - b s, x1 - a s].
  auto [lo, hi] = span_1d(f.slices.front());
  CHECK(std::abs(lo - (-0.1 - 0.5 * 0.4)) <= 1.5 * g.spacing);
  CHECK(std::abs(hi - (0.1 + 0.3 * 0.4)) <= 1.5 * g.spacing);
}

TEST_CASE("funnel: validation rejects bad spans, steps and seeds") {
  Grid g = Grid::line(-1, 1, 64);
  GridSet seed = interval_set(g, -0.2, 0.2);
  IsotropicProvider field(0.5, 1);
  CHECK_THROWS_AS(propagate_funnel(field, seed, 0.5, 0.5, 0.01, Direction::Forward),
                  PreconditionError);
  CHECK_THROWS_AS(propagate_funnel(field, seed, 0.0, 0.5, 0.0, Direction::Forward),
                  PreconditionError);
  CHECK_THROWS_AS(propagate_funnel(field, seed, 0.0, 0.5, 10 * g.spacing, Direction::Forward),
                  CflViolationError);
  GridSet empty(g);
  CHECK_THROWS_AS(propagate_funnel(field, empty, 0.0, 0.5, 0.01, Direction::Forward),
                  EmptySetError);
  GridSet all = rasterize(g, [](Vec2) { return true; });
  CHECK_THROWS_AS(propagate_funnel(field, all, 0.0, 0.5, 0.01, Direction::Forward),
                  PreconditionError);
  Grid g2 = Grid::box(-1, 1, 32);
  GridSet seed2 = ball_set(g2, {0, 0}, 0.3);
  CHECK_THROWS_AS(propagate_funnel(field, seed2, 0.0, 0.5, 0.01, Direction::Forward),
                  GridMismatchError);
}

TEST_CASE("funnel: growth into the border ring raises an overflow") {
  Grid g = Grid::line(-1, 1, 64);
  GridSet seed = interval_set(g, -0.2, 0.2);
  IsotropicProvider field(0.5, 1);
  CHECK_THROWS_AS(propagate_funnel(field, seed, 0.0, 2.0, g.spacing / 0.5, Direction::Forward),
                  SupportOverflowError);
}

TEST_CASE("funnel: slice_at finds stored times only") {
  Grid g = Grid::line(-1, 1, 64);
  GridSet seed = interval_set(g, -0.2, 0.2);
  IsotropicProvider field(0.2, 1);
  Funnel f = propagate_funnel(field, seed, 0.0, 0.4, 0.1, Direction::Forward);
  CHECK(f.dt() == doctest::Approx(0.1));
  CHECK(&f.slice_at(0.4) == &f.slices.back());
  CHECK_THROWS_AS(f.slice_at(0.123), PreconditionError);
}

TEST_CASE("funnel: save and load round trip") {
  namespace fs = std::filesystem;
  Grid g = Grid::box(-1, 1, 48);
  GridSet seed = ball_set(g, {0.1, -0.2}, 0.25);
  IsotropicProvider field(0.3, 2);
  Funnel f = propagate_funnel(field, seed, 0.2, 0.5, g.spacing / 0.3, Direction::Backward);

  fs::path dir = fs::temp_directory_path() / "fnl_funnel_roundtrip";
  fs::remove_all(dir);
  save_funnel(f, dir.string());
  Funnel r = load_funnel(dir.string());
  fs::remove_all(dir);

  CHECK(r.direction == Direction::Backward);
  REQUIRE(r.times.size() == f.times.size());
  for (size_t i = 0; i < f.times.size(); ++i) CHECK(r.times[i] == doctest::Approx(f.times[i]));
  REQUIRE(r.slices.size() == f.slices.size());
  for (size_t i = 0; i < f.slices.size(); ++i) {
    CHECK(r.slices[i].grid == f.slices[i].grid);
    CHECK(r.slices[i].mask == f.slices[i].mask);
    REQUIRE(r.slices[i].has_level());
    for (size_t j = 0; j < f.slices[i].level.size(); ++j)
      CHECK(r.slices[i].level[j] == doctest::Approx(f.slices[i].level[j]).epsilon(1e-12));
  }
}

TEST_CASE("residual: expanding disk satisfies the normal condition") {
  Grid g = Grid::box(-2, 2, 128);
  GridSet seed = ball_set(g, {0, 0}, 0.3);
  IsotropicProvider field(0.5, 2);
  Funnel f = propagate_funnel(field, seed, 0.0, 0.6, g.spacing / 0.5, Direction::Forward);
  ResidualStats st = proximal_residual(f, field);
  CHECK(st.evaluated > 200);
  CHECK(st.median <= 0.1);
}

TEST_CASE("residual: translated disk satisfies the normal condition") {
  Grid g = Grid::box(-2, 2, 128);
  GridSet seed = ball_set(g, {-0.3, 0.1}, 0.3);
  SingletonProvider field({0.5, -0.25}, 2);
  Funnel f = propagate_funnel(field, seed, 0.0, 0.8, g.spacing / field.speed_bound(),
                              Direction::Forward);
  ResidualStats st = proximal_residual(f, field);
  CHECK(st.evaluated > 200);
  CHECK(st.median <= 0.1);
}

TEST_CASE("residual: 1D flux funnel, both directions") {
  Grid g = Grid::line(-1.5, 1.5, 512);
  GridSet seed = interval_set(g, -0.1, 0.1);
  FluxModel flux = FluxModel::burgers(1.0);
  BoundsEnvelope env = BoundsEnvelope::constant(-0.3, 0.5);
  const double dt = g.spacing / flux.speed_bound;
  for (Direction dir : {Direction::Forward, Direction::Backward}) {
    Funnel f = propagate_funnel(flux, seed, env, 0.0, 0.4, dt, dir);
    ResidualStats st = proximal_residual(f, flux, env);
    CHECK(st.evaluated > 50);
    CHECK(st.median <= 0.1);
  }
}

TEST_CASE("staircase envelopes: symmetric difference shrinks with the step") {
  Grid g = Grid::line(-1.5, 1.5, 256);
  GridSet seed = interval_set(g, -0.15, 0.15);
  FluxModel flux = FluxModel::sine_drift_burgers(0.4, 1.0);
  BoundsEnvelope env = BoundsEnvelope::exponential(-0.2, 0.5, 0.4, 1);
  auto rows = funnel_convergence(flux, seed, env, 0.0, 0.4, g.spacing / flux.speed_bound,
                                 {0.2, 0.1, 0.05});
  REQUIRE(rows.size() == 3);
  // Staircase bands nest dyadically, so the funnels and their gaps do too.
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i + 1].max_sym_diff <= rows[i].max_sym_diff + 1e-12);
    CHECK(rows[i + 1].final_sym_diff <= rows[i].final_sym_diff + 1e-12);
  }
  CHECK(rows.front().max_sym_diff > 0);
}
