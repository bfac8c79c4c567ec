#pragma once

#include "fnl/funnel.hpp"
#include "fnl/solver.hpp"

namespace fnl {

struct EstimateConfig {
  SchemeConfig scheme;
  double dt_funnel = 0;      // 0: spacing / speed_bound
  int nsamp = 64;            // u-samples per velocity set
  double support_tol = kSupportTolerance;
  double tubular_radius_cells = 3;  // contraction sets must be this round
  double probe_margin_cells = 10;   // perturbation support clearance
};

struct ContractionReport {
  double lhs = 0;    // integral of |u - ubar| over K at tau
  double rhs = 0;    // same integral over the backward slice at tau0
  double slack = 0;  // rhs - lhs
  double spacing = 0;
  GridSet backward_set;  // funnel slice at tau0
  Funnel funnel;
};

/// Evaluate the funnel comparison bound for two initial data: march both to
/// tau, run the velocity-set funnel backward from K over [tau0, tau] with the
/// decay/growth envelope built from the data ranges, and compare the L1
/// mismatch over K at tau against the mismatch over the backward slice at
/// tau0.  K must look like a tubular neighbourhood at radius
/// tubular_radius_cells * spacing.
ContractionReport contraction_check(const FluxModel& flux, const Field& u0, const Field& ubar0,
                                    const GridSet& k, double tau0, double tau,
                                    const EstimateConfig& cfg = {});

struct DodEstimate {
  Vec2 point{0, 0};
  double t = 0;
  GridSet set;        // slice at time 0 of the backward funnel from {point}
  double ball_radius = 0;  // speed_bound * t, the coarse containment radius
};

/// Outer estimate of the set of initial positions that can influence the
/// solution at (x, t), for data ranged in [a0, b0].
DodEstimate domain_of_dependence(const FluxModel& flux, double a0, double b0, Vec2 x, double t,
                                 const Grid& grid, const EstimateConfig& cfg = {});

struct PerturbationReport {
  double probe = 0;        // mean |u - v| over the probe ball at time t
  double probe_radius = 0;
  double clearance = 0;    // distance from spt w to the estimate
  DodEstimate estimate;
};

/// Perturb u0 by eps*w with spt w clear of the dependence estimate for (x,t)
/// (margin >= probe_margin_cells * spacing, else PreconditionError; w must
/// have sup-norm 1) and measure how much the solution at (x, t) moves.
PerturbationReport perturbation_test(const FluxModel& flux, const Field& u0, const Field& w,
                                     Vec2 x, double t, double eps, double probe_radius,
                                     const EstimateConfig& cfg = {});

struct SupportReport {
  bool contained = true;        // every support within 2 cells of its slice
  double worst_protrusion = 0;  // max distance of support outside the slice
  double worst_time = 0;
  std::vector<std::pair<double, double>> per_time;  // (t, protrusion)
  Funnel funnel;
  Trajectory trajectory;
};

/// Confinement of the support: for nonnegative data and a flux vanishing at
/// u = 0, the support at every stored time must stay within the forward
/// funnel slice of the initial support (protrusion measured in distance,
/// pass threshold 2 * spacing).
SupportReport support_envelope(const FluxModel& flux, const Field& u0, double T,
                               const EstimateConfig& cfg = {});

}  // namespace fnl
