#pragma once

#include <functional>
#include <string>

#include "fnl/grid.hpp"

namespace fnl {

/// A flux f(t, x, u) together with the constants the set estimates consume.
///
/// lip_x bounds the Lipschitz modulus of (t,x) -> ∂f/∂u for each fixed u;
/// speed_bound dominates |∂f/∂u| over the working box and value range.  When
/// `separable` is set, ∂f/∂u(t,x,u) = drift(t,x) + ushape(t,u), which lets
/// set propagation hull the u-dependent part once per time step.
struct FluxModel {
  std::string name;
  int dim = 1;

  std::function<Vec2(double, Vec2, double)> flux;      // f(t,x,u)
  std::function<Vec2(double, Vec2, double)> dflux_du;  // ∂f/∂u(t,x,u)

  double lip_x = 0;
  double speed_bound = 0;
  bool satisfies_f4 = false;

  bool separable = false;
  std::function<Vec2(double, Vec2)> drift;     // valid iff separable
  std::function<Vec2(double, double)> ushape;  // valid iff separable

  /// f(u) = u^2/2 along x.  speed_bound is sup|u| over the working range.
  static FluxModel burgers(double umax_abs = 1.0);

  /// f(u) = c u (1D constant-speed transport).
  static FluxModel advection(double c);

  /// f(u) = c u in 2D.
  static FluxModel advection2(Vec2 c);

  /// f(x,u) = amp*sin(x)*u + u^2/2: spatially varying drift plus a convex
  /// nonlinearity.  lip_x = amp; vanishes at u = 0.
  static FluxModel sine_drift_burgers(double amp, double umax_abs = 1.0);

  /// 2D solid rotation drift: f(x,u) = omega*(-x2, x1)*u.  lip_x = omega;
  /// speed_bound is taken over the box [-halfwidth, halfwidth]^2 times the
  /// value range (|u| <= umax_abs).
  static FluxModel rotation(double omega, double box_halfwidth, double umax_abs = 1.0);

  /// Spot-check the recorded constants against sampled difference quotients
  /// of ∂f/∂u over box [-halfwidth,halfwidth]^dim x [ulo,uhi].  Returns the
  /// worst ratio sampled_quotient / lip_x (<= 1 when consistent) through
  /// *lip_ratio, and sampled max |∂f/∂u| / speed_bound through *speed_ratio.
  void sample_constants(double halfwidth, double ulo, double uhi, int samples,
                        double* lip_ratio, double* speed_ratio) const;
};

}  // namespace fnl
