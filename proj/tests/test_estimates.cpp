#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fnl/estimates.hpp"

using namespace fnl;

namespace {

Field bump_1d(const Grid& g, double center, double radius, double height) {
  Field u(g);
  for (int i = 0; i < g.cell_count(); ++i) {
    const double d = std::abs(g.center(i)[0] - center);
    u.values[i] = d < radius ? height * 0.5 * (1 + std::cos(M_PI * d / radius)) : 0.0;
  }
  return u;
}

Field box_1d(const Grid& g, double lo, double hi, double height) {
  Field u(g);
  for (int i = 0; i < g.cell_count(); ++i) {
    const double x = g.center(i)[0];
    u.values[i] = (x >= lo && x <= hi) ? height : 0.0;
  }
  return u;
}

std::pair<double, double> span_1d(const GridSet& s) {
  double lo = 1e300, hi = -1e300;
  for (int ix = 0; ix < s.grid.extents[0]; ++ix)
    if (s.mask[ix]) {
      lo = std::min(lo, s.grid.center(ix, 0)[0]);
      hi = std::max(hi, s.grid.center(ix, 0)[0]);
    }
  return {lo, hi};
}

}  // namespace

TEST_CASE("contraction: identical data gives zero on both sides") {
  Grid g = Grid::line(-1.5, 1.5, 256);
  Field u0 = bump_1d(g, -0.2, 0.4, 0.8);
  GridSet k = ball_set(g, {0.2, 0.0}, 0.4);
  ContractionReport rep = contraction_check(FluxModel::burgers(1.0), u0, u0, k, 0.0, 0.3);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.slack == 0.0);
  CHECK(rep.spacing == doctest::Approx(g.spacing));
}

TEST_CASE("contraction: mismatch over K is bounded by the backward-slice mismatch") {
  Grid g = Grid::line(-1.5, 1.5, 512);
  Field u0 = bump_1d(g, -0.3, 0.4, 1.0);
  Field v0 = bump_1d(g, -0.1, 0.5, 0.8);
  GridSet k = ball_set(g, {0.2, 0.0}, 0.4);
  ContractionReport rep = contraction_check(FluxModel::burgers(1.0), u0, v0, k, 0.0, 0.3);
  CHECK(rep.lhs > 0);
  CHECK(rep.slack >= -2.0 * g.spacing);
  // The backward funnel starts from K, so its initial slice contains K.
  CHECK(subset_of(k, rep.backward_set));
  CHECK(rep.funnel.direction == Direction::Backward);
  CHECK(rep.funnel.times.back() == doctest::Approx(0.3));
}

TEST_CASE("contraction: zero reference turns the bound into a mass estimate") {
  Grid g = Grid::line(-1.5, 1.5, 512);
  Field u0 = bump_1d(g, 0.0, 0.4, 0.7);
  Field zero(g);
  GridSet k = ball_set(g, {0.15, 0.0}, 0.35);
  ContractionReport rep =
      contraction_check(FluxModel::sine_drift_burgers(0.3, 1.0), u0, zero, k, 0.0, 0.25);
  CHECK(rep.lhs > 0);
  CHECK(rep.rhs > 0);
  CHECK(rep.slack >= -2.0 * g.spacing);
}

TEST_CASE("contraction: later windows work the same") {
  Grid g = Grid::line(-1.5, 1.5, 384);
  Field u0 = bump_1d(g, -0.2, 0.4, 0.8);
  Field v0 = bump_1d(g, -0.25, 0.35, 0.9);
  GridSet k = ball_set(g, {0.1, 0.0}, 0.35);
  ContractionReport rep = contraction_check(FluxModel::burgers(1.0), u0, v0, k, 0.1, 0.35);
  CHECK(rep.slack >= -2.0 * g.spacing);
  CHECK(rep.funnel.times.front() == doctest::Approx(0.1));
  CHECK(rep.funnel.times.back() == doctest::Approx(0.35));
}

TEST_CASE("contraction: rejects thin sets, empty sets and bad windows") {
  Grid g = Grid::line(-1.5, 1.5, 256);
  Field u0 = bump_1d(g, 0.0, 0.4, 0.5);
  GridSet thin(g);
  thin.mask[128] = 1;
  CHECK_THROWS_AS(contraction_check(FluxModel::burgers(1.0), u0, u0, thin, 0.0, 0.3),
                  PreconditionError);
  GridSet empty(g);
  CHECK_THROWS_AS(contraction_check(FluxModel::burgers(1.0), u0, u0, empty, 0.0, 0.3),
                  EmptySetError);
  GridSet k = ball_set(g, {0.0, 0.0}, 0.4);
  CHECK_THROWS_AS(contraction_check(FluxModel::burgers(1.0), u0, u0, k, 0.3, 0.3),
                  PreconditionError);
  Grid g2 = Grid::line(-1, 1, 256);
  Field other(g2);
  CHECK_THROWS_AS(contraction_check(FluxModel::burgers(1.0), u0, other, k, 0.0, 0.3),
                  GridMismatchError);
}

TEST_CASE("dependence domain: convex 1D flux gives the exact interval") {
  Grid g = Grid::line(-1, 1, 512);
  FluxModel flux = FluxModel::burgers(1.0);
  // Velocities stay in [a0, b0], so the backward reach of {x} over t is
  // exactly [x - b0 t, x - a0 t].
  const double a0 = -0.2, b0 = 0.4, t = 0.5;
  const Vec2 x{0.3, 0.0};
  DodEstimate est = domain_of_dependence(flux, a0, b0, x, t, g);
  auto [lo, hi] = span_1d(est.set);
  CHECK(std::abs(lo - (x[0] - b0 * t)) <= 2 * g.spacing);
  CHECK(std::abs(hi - (x[0] - a0 * t)) <= 2 * g.spacing);
  CHECK(est.ball_radius == doctest::Approx(flux.speed_bound * t));
}

TEST_CASE("dependence domain: estimate stays inside the coarse speed ball") {
  Grid g = Grid::line(-1.5, 1.5, 384);
  FluxModel flux = FluxModel::sine_drift_burgers(0.4, 1.0);
  DodEstimate est = domain_of_dependence(flux, -0.5, 0.5, {0.2, 0.0}, 0.4, g);
  Raster d = distance_field(ball_set(g, est.point, est.ball_radius));
  for (int i = 0; i < g.cell_count(); ++i)
    if (est.set.mask[i]) CHECK(d.values[i] <= 2 * g.spacing);
}

TEST_CASE("dependence domain: tighter value bands give smaller estimates") {
  Grid g = Grid::line(-1, 1, 512);
  FluxModel flux = FluxModel::burgers(1.0);
  DodEstimate tight = domain_of_dependence(flux, -0.1, 0.2, {0.3, 0.0}, 0.4, g);
  DodEstimate wide = domain_of_dependence(flux, -0.3, 0.4, {0.3, 0.0}, 0.4, g);
  CHECK(subset_of(tight.set, wide.set));
  CHECK(measure(tight.set) < measure(wide.set));
}

TEST_CASE("dependence domain: rejects bad windows and inverted bands") {
  Grid g = Grid::line(-1, 1, 128);
  FluxModel flux = FluxModel::burgers(1.0);
  CHECK_THROWS_AS(domain_of_dependence(flux, -0.1, 0.2, {0.0, 0.0}, 0.0, g), PreconditionError);
  CHECK_THROWS_AS(domain_of_dependence(flux, 0.3, 0.2, {0.0, 0.0}, 0.4, g), PreconditionError);
}

TEST_CASE("perturbation: support clear of the estimate leaves the probe quiet") {
  Grid g = Grid::line(-2, 2, 512);
  FluxModel flux = FluxModel::burgers(1.0);
  Field u0 = bump_1d(g, 0.0, 0.5, 0.8);
  // The bump peak sits between cell centers, so rescale to sampled sup-norm 1.
  Field w = bump_1d(g, 1.5, 0.2, 1.0);
  const double wmax = *std::max_element(w.values.begin(), w.values.end());
  for (double& v : w.values) v /= wmax;
  PerturbationReport rep = perturbation_test(flux, u0, w, {0.2, 0.0}, 0.4, 0.1, 0.0);
  CHECK(rep.clearance > 0.5);
  CHECK(rep.probe <= 1e-6);
  CHECK(rep.probe_radius == doctest::Approx(5 * g.spacing));
}

TEST_CASE("perturbation: rejects unnormalized shapes and close supports") {
  Grid g = Grid::line(-2, 2, 256);
  FluxModel flux = FluxModel::burgers(1.0);
  Field u0 = bump_1d(g, 0.0, 0.5, 0.8);
  Field half = bump_1d(g, 1.5, 0.2, 0.5);
  CHECK_THROWS_AS(perturbation_test(flux, u0, half, {0.2, 0.0}, 0.4, 0.1, 0.0),
                  PreconditionError);
  Field close = bump_1d(g, 0.35, 0.2, 1.0);  // overlaps the dependence interval
  const double cmax = *std::max_element(close.values.begin(), close.values.end());
  for (double& v : close.values) v /= cmax;
  CHECK_THROWS_WITH_AS(perturbation_test(flux, u0, close, {0.2, 0.0}, 0.4, 0.1, 0.0),
                       doctest::Contains("too close"), PreconditionError);
}

TEST_CASE("support envelope: 1D box support stays in the funnel") {
  Grid g = Grid::line(-2.5, 3.5, 512);
  Field u0 = box_1d(g, -1.0, 1.0, 1.0);
  EstimateConfig cfg;
  // Threshold at the scheme's smearing floor: a first-order scheme lays a
  // boundary layer ~sqrt(aT/h) cells wide, and thresholds far below its
  // amplitude measure that layer instead of the support.
  cfg.support_tol = 0.07;
  SupportReport rep = support_envelope(FluxModel::burgers(1.0), u0, 1.0, cfg);
  CHECK(rep.contained);
  CHECK(rep.worst_protrusion <= 2 * g.spacing);
  CHECK(rep.per_time.size() == rep.funnel.times.size());
  // Funnel right edge rides the top of the value band: [-1, 1 + t].
  auto [lo, hi] = span_1d(rep.funnel.slices.back());
  CHECK(std::abs(hi - 2.0) <= 2 * g.spacing);
  CHECK(std::abs(lo + 1.0) <= 2 * g.spacing);
}

TEST_CASE("support envelope: rotating radial bump stays put") {
  Grid g = Grid::box(-2, 2, 96);
  Field u0(g);
  for (int i = 0; i < g.cell_count(); ++i) {
    const double d = norm(g.center(i));
    u0.values[i] = d < 0.45 ? 0.7 * 0.5 * (1 + std::cos(M_PI * d / 0.45)) : 0.0;
  }
  EstimateConfig cfg;
  cfg.support_tol = 0.05;  // smearing floor, as above
  SupportReport rep = support_envelope(FluxModel::rotation(0.75, 2.0, 1.0), u0, 0.8, cfg);
  CHECK(rep.contained);
  CHECK(rep.worst_protrusion <= 2 * g.spacing);
  // The rotation field only turns the support, so every slice stays near the
  // seed (the disk where the bump clears the threshold).
  const GridSet& seed = rep.funnel.slices.front();
  for (const GridSet& s : rep.funnel.slices)
    CHECK(hausdorff_distance(s, seed) <= 2 * g.spacing);
}

TEST_CASE("support envelope: zero data is trivially contained") {
  Grid g = Grid::line(-1, 1, 64);
  Field u0(g);
  SupportReport rep = support_envelope(FluxModel::burgers(1.0), u0, 0.5);
  CHECK(rep.contained);
  CHECK(rep.worst_protrusion == 0.0);
}

TEST_CASE("support envelope: rejects negative data and non-vanishing fluxes") {
  Grid g = Grid::line(-1, 1, 64);
  Field u0 = bump_1d(g, 0.0, 0.3, 0.5);
  Field neg = u0;
  neg.values[32] = -0.1;
  CHECK_THROWS_AS(support_envelope(FluxModel::burgers(1.0), neg, 0.3), PreconditionError);
  FluxModel offset = FluxModel::burgers(1.0);
  offset.satisfies_f4 = false;
  CHECK_THROWS_AS(support_envelope(offset, u0, 0.3), PreconditionError);
}
