#include "fnl/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace fnl {

namespace {

std::pair<double, double> value_range(const Field& f) {
  auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  return {*lo, *hi};
}

double funnel_dt(const FluxModel& flux, const Grid& g, double requested) {
  if (requested > 0) return requested;
  const double c = std::max(flux.speed_bound, 1e-12);
  return g.spacing / c;
}

}  // namespace

ContractionReport contraction_check(const FluxModel& flux, const Field& u0, const Field& ubar0,
                                    const GridSet& k, double tau0, double tau,
                                    const EstimateConfig& cfg) {
  require_same_grid(u0.grid, ubar0.grid, "contraction_check");
  require_same_grid(u0.grid, k.grid, "contraction_check");
  if (!(tau > tau0) || tau0 < u0.time - 1e-12)
    throw PreconditionError("contraction_check: need u0.time <= tau0 < tau");
  if (k.empty()) throw EmptySetError("contraction_check: empty comparison set");
  const Grid& g = u0.grid;
  const double r = cfg.tubular_radius_cells * g.spacing;
  if (!is_tubular(k, r, 2.0 * g.spacing))
    throw PreconditionError("contraction_check: comparison set is not tubular at radius " +
                            std::to_string(cfg.tubular_radius_cells) + " cells");

  // Shared solution band from both data; the envelope widens it over time.
  auto [alo, ahi] = value_range(u0);
  auto [blo, bhi] = value_range(ubar0);
  const double a0 = std::min(alo, blo), b0 = std::max(ahi, bhi);
  BoundsEnvelope env = BoundsEnvelope::exponential(a0, b0, flux.lip_x, g.dim);

  SchemeConfig scheme = cfg.scheme;
  scheme.checkpoints.push_back(tau0);
  scheme.checkpoints.push_back(tau);
  Trajectory tu = solve(flux, u0, tau - u0.time, scheme);
  Trajectory tv = solve(flux, ubar0, tau - ubar0.time, scheme);

  // The envelope clock starts at the datum, so propagate in elapsed time.
  const double shift = u0.time;
  ContractionReport rep;
  rep.funnel = propagate_funnel(flux, k, env, tau0 - shift, tau - shift,
                                funnel_dt(flux, g, cfg.dt_funnel), Direction::Backward,
                                cfg.nsamp);
  // Restore absolute times on the reported funnel.
  for (double& t : rep.funnel.times) t += shift;

  rep.spacing = g.spacing;
  rep.backward_set = rep.funnel.slices.front();
  rep.lhs = l1_distance(tu.at_time(tau), tv.at_time(tau), k);
  rep.rhs = l1_distance(tu.at_time(tau0), tv.at_time(tau0), rep.backward_set);
  rep.slack = rep.rhs - rep.lhs;
  return rep;
}

DodEstimate domain_of_dependence(const FluxModel& flux, double a0, double b0, Vec2 x, double t,
                                 const Grid& grid, const EstimateConfig& cfg) {
  if (!(t > 0)) throw PreconditionError("domain_of_dependence: need t > 0");
  if (!(a0 <= b0)) throw PreconditionError("domain_of_dependence: need a0 <= b0");
  BoundsEnvelope env = BoundsEnvelope::exponential(a0, b0, flux.lip_x, grid.dim);
  GridSet seed(grid);
  seed.mask[grid.locate(x)] = 1;
  Funnel f = propagate_funnel(flux, seed, env, 0.0, t, funnel_dt(flux, grid, cfg.dt_funnel),
                              Direction::Backward, cfg.nsamp);
  DodEstimate est;
  est.point = x;
  est.t = t;
  est.set = f.slices.front();
  est.ball_radius = flux.speed_bound * t;
  return est;
}

PerturbationReport perturbation_test(const FluxModel& flux, const Field& u0, const Field& w,
                                     Vec2 x, double t, double eps, double probe_radius,
                                     const EstimateConfig& cfg) {
  require_same_grid(u0.grid, w.grid, "perturbation_test");
  const Grid& g = u0.grid;
  double wmax = 0;
  for (double v : w.values) wmax = std::max(wmax, std::abs(v));
  if (std::abs(wmax - 1.0) > 1e-9)
    throw PreconditionError("perturbation_test: perturbation shape must have sup-norm 1");

  auto [lo, hi] = value_range(u0);
  PerturbationReport rep;
  rep.estimate = domain_of_dependence(flux, lo - eps, hi + eps, x, t, g, cfg);

  GridSet wsupp = support_of_field(Raster{g, w.values}, cfg.support_tol);
  if (wsupp.empty()) {
    rep.clearance = 1e300;
  } else {
    Raster dist = distance_field(rep.estimate.set);
    double dmin = 1e300;
    for (int i = 0; i < g.cell_count(); ++i)
      if (wsupp.mask[i]) dmin = std::min(dmin, dist.values[i]);
    rep.clearance = dmin;
    if (dmin < cfg.probe_margin_cells * g.spacing)
      throw PreconditionError(
          "perturbation_test: perturbation support too close to the dependence estimate");
  }

  Field v0 = u0;
  for (size_t i = 0; i < v0.values.size(); ++i) v0.values[i] += eps * w.values[i];

  SchemeConfig scheme = cfg.scheme;
  Trajectory tu = solve(flux, u0, t - u0.time, scheme);
  Trajectory tv = solve(flux, v0, t - v0.time, scheme);

  rep.probe_radius = probe_radius > 0 ? probe_radius : 5.0 * g.spacing;
  GridSet probe = ball_set(g, x, rep.probe_radius);
  const double area = measure(probe);
  rep.probe = area > 0 ? l1_distance(tu.final(), tv.final(), probe) / area : 0.0;
  return rep;
}

SupportReport support_envelope(const FluxModel& flux, const Field& u0, double T,
                               const EstimateConfig& cfg) {
  for (double v : u0.values)
    if (v < 0) throw PreconditionError("support_envelope: data must be nonnegative");
  if (!flux.satisfies_f4)
    throw PreconditionError("support_envelope: flux must vanish at u = 0");
  const Grid& g = u0.grid;
  GridSet k0 = support_of_field(Raster{g, u0.values}, cfg.support_tol);
  if (k0.empty()) {
    // Zero data stays zero: an empty support is contained in anything.
    SupportReport rep;
    rep.funnel.times = {0.0};
    rep.funnel.slices = {k0};
    rep.trajectory.flux_name = flux.name;
    rep.trajectory.fields.push_back(u0);
    rep.per_time.emplace_back(u0.time, 0.0);
    return rep;
  }

  auto [lo, hi] = value_range(u0);
  BoundsEnvelope env = BoundsEnvelope::exponential(std::min(lo, 0.0), hi, flux.lip_x, g.dim);

  SupportReport rep;
  rep.funnel = propagate_funnel(flux, k0, env, 0.0, T, funnel_dt(flux, g, cfg.dt_funnel),
                                Direction::Forward, cfg.nsamp);

  SchemeConfig scheme = cfg.scheme;
  for (double t : rep.funnel.times)
    if (t > 1e-12) scheme.checkpoints.push_back(u0.time + t);
  // Cap stored snapshots: checkpoints are kept regardless of the cadence.
  rep.trajectory = solve(flux, u0, T, scheme);

  for (size_t i = 0; i < rep.funnel.times.size(); ++i) {
    const double t_abs = u0.time + rep.funnel.times[i];
    const Field* f = nullptr;
    for (const Field& cand : rep.trajectory.fields)
      if (std::abs(cand.time - t_abs) <= 1e-9) {
        f = &cand;
        break;
      }
    if (!f) continue;
    GridSet spt = support_of_field(Raster{g, f->values}, cfg.support_tol);
    double prot = 0;
    if (!spt.empty()) {
      Raster dist = distance_field(rep.funnel.slices[i]);
      for (int c = 0; c < g.cell_count(); ++c)
        if (spt.mask[c]) prot = std::max(prot, dist.values[c]);
    }
    rep.per_time.emplace_back(t_abs, prot);
    if (prot > rep.worst_protrusion) {
      rep.worst_protrusion = prot;
      rep.worst_time = t_abs;
    }
  }
  rep.contained = rep.worst_protrusion <= 2.0 * g.spacing;
  return rep;
}

}  // namespace fnl
