#pragma once

#include <vector>

#include "fnl/envelope.hpp"
#include "fnl/flux.hpp"
#include "fnl/geometry.hpp"

namespace fnl {

/// Grid function at a fixed time.
struct Field {
  Grid grid;
  double time = 0;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double t = 0) : grid(g), time(t), values(g.cell_count(), 0.0) {}
};

struct SchemeConfig {
  double cfl = 0.45;            // must lie in (0, 0.5]
  int max_snapshots = 65;       // stored fields per run (ends always kept)
  std::vector<double> checkpoints;  // times the stepper must land on and store
  double support_tol = 1e-12;   // border-cell magnitude that trips the guard
};

/// Stored states of one run.  Fields ascend in time from the initial datum to
/// the final time; worst_cfl_used records max over steps of dt*speed/spacing.
struct Trajectory {
  std::string flux_name;
  double cfl = 0;
  double worst_cfl_used = 0;
  int steps_taken = 0;
  std::vector<Field> fields;

  const Field& initial() const { return fields.front(); }
  const Field& final() const { return fields.back(); }
  const Field& at_time(double t, double tol = 1e-9) const {
    for (const Field& f : fields)
      if (std::abs(f.time - t) <= tol) return f;
    throw PreconditionError("trajectory: no stored field at requested time");
  }
};

/// March u0 forward by duration T with the monotone interface-split scheme:
/// interface flux 0.5*(f(uL)+f(uR)) - 0.5*a*(uR-uL) evaluated at the
/// interface midpoint, a = max |∂f/∂u| over the two cell values; dimensional
/// splitting (x half step, y full, x half) in 2D; outflow ghost cells.  The
/// step size is chosen from the data each step so dt*speed <= cfl*spacing.
/// Throws SupportOverflowError when |u| exceeds cfg.support_tol on the border
/// ring, and CflViolationError for cfl outside (0, 0.5].
Trajectory solve(const FluxModel& flux, const Field& u0, double T,
                 const SchemeConfig& cfg = {});

/// Integral of |u - v| over the cells of K (same grid and time required).
double l1_distance(const Field& u, const Field& v, const GridSet& k);

/// Integral of u over the whole grid.
double total_mass(const Field& u);

struct BoundsReport {
  bool pass = true;
  double worst_violation = 0;  // max positive excursion outside [a(t), b(t)]
  double worst_time = 0;
};

/// Check every stored field against the envelope with additive tolerance.
BoundsReport verify_bounds(const Trajectory& traj, const BoundsEnvelope& env, double tol);

/// Total variation of a 1D field (tests a TVD invariant).
double total_variation(const Field& u);

}  // namespace fnl
