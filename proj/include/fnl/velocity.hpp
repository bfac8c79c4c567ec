#pragma once

#include <vector>

#include "fnl/envelope.hpp"
#include "fnl/flux.hpp"

namespace fnl {

/// Compact convex velocity set: an interval in 1D, a convex polygon (CCW
/// vertices, possibly degenerate to a segment or point) in 2D.
struct VelocitySet {
  int dim = 1;
  double vmin = 0, vmax = 0;   // 1D
  std::vector<Vec2> hull;      // 2D

  static VelocitySet interval(double lo, double hi) {
    if (!(lo <= hi)) throw PreconditionError("velocity set: need vmin <= vmax");
    VelocitySet s;
    s.dim = 1;
    s.vmin = lo;
    s.vmax = hi;
    return s;
  }

  static VelocitySet polygon(std::vector<Vec2> points);  // hulls the input

  static VelocitySet singleton(Vec2 v, int dim) {
    if (dim == 1) return interval(v[0], v[0]);
    VelocitySet s;
    s.dim = 2;
    s.hull = {v};
    return s;
  }

  /// Largest |v| over the set.
  double speed() const;

  VelocitySet translated(Vec2 off) const;
};

/// Monotone-chain convex hull, CCW order, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Support function H(p) = max { p·v : v in F }.  1D uses p[0].
double hamiltonian(const VelocitySet& f, Vec2 p);

/// Velocity set of a flux at (t,x) over the envelope's value band:
/// the convex hull of ∂f/∂u(t, x, u) for nsamp values of u spread uniformly
/// over [a(t), b(t)] (endpoints always included).
VelocitySet velocity_set(const FluxModel& flux, double t, Vec2 x, const BoundsEnvelope& env,
                         int nsamp = 64);

}  // namespace fnl
