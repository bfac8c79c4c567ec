#include "fnl/flux.hpp"

#include <cmath>

namespace fnl {

FluxModel FluxModel::burgers(double umax_abs) {
  FluxModel m;
  m.name = "burgers";
  m.dim = 1;
  m.flux = [](double, Vec2, double u) { return Vec2{0.5 * u * u, 0.0}; };
  m.dflux_du = [](double, Vec2, double u) { return Vec2{u, 0.0}; };
  m.lip_x = 0.0;
  m.speed_bound = std::abs(umax_abs);
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [](double, Vec2) { return Vec2{0.0, 0.0}; };
  m.ushape = [](double, double u) { return Vec2{u, 0.0}; };
  return m;
}

FluxModel FluxModel::advection(double c) {
  FluxModel m;
  m.name = "advection";
  m.dim = 1;
  m.flux = [c](double, Vec2, double u) { return Vec2{c * u, 0.0}; };
  m.dflux_du = [c](double, Vec2, double) { return Vec2{c, 0.0}; };
  m.lip_x = 0.0;
  m.speed_bound = std::abs(c);
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [c](double, Vec2) { return Vec2{c, 0.0}; };
  m.ushape = [](double, double) { return Vec2{0.0, 0.0}; };
  return m;
}

FluxModel FluxModel::advection2(Vec2 c) {
  FluxModel m;
  m.name = "advection2";
  m.dim = 2;
  m.flux = [c](double, Vec2, double u) { return Vec2{c[0] * u, c[1] * u}; };
  m.dflux_du = [c](double, Vec2, double) { return c; };
  m.lip_x = 0.0;
  m.speed_bound = norm(c);
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [c](double, Vec2) { return c; };
  m.ushape = [](double, double) { return Vec2{0.0, 0.0}; };
  return m;
}

FluxModel FluxModel::sine_drift_burgers(double amp, double umax_abs) {
  FluxModel m;
  m.name = "sine_drift_burgers";
  m.dim = 1;
  m.flux = [amp](double, Vec2 x, double u) {
    return Vec2{amp * std::sin(x[0]) * u + 0.5 * u * u, 0.0};
  };
  m.dflux_du = [amp](double, Vec2 x, double u) { return Vec2{amp * std::sin(x[0]) + u, 0.0}; };
  m.lip_x = std::abs(amp);
  m.speed_bound = std::abs(amp) + std::abs(umax_abs);
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [amp](double, Vec2 x) { return Vec2{amp * std::sin(x[0]), 0.0}; };
  m.ushape = [](double, double u) { return Vec2{u, 0.0}; };
  return m;
}

FluxModel FluxModel::rotation(double omega, double box_halfwidth, double) {
  FluxModel m;
  m.name = "rotation";
  m.dim = 2;
  m.flux = [omega](double, Vec2 x, double u) {
    return Vec2{-omega * x[1] * u, omega * x[0] * u};
  };
  m.dflux_du = [omega](double, Vec2 x, double) { return Vec2{-omega * x[1], omega * x[0]}; };
  m.lip_x = std::abs(omega);
  // |∂f/∂u| = omega*|x| <= omega * sqrt(2) * halfwidth, independent of u.
  m.speed_bound = std::abs(omega) * std::sqrt(2.0) * box_halfwidth;
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [omega](double, Vec2 x) { return Vec2{-omega * x[1], omega * x[0]}; };
  m.ushape = [](double, double) { return Vec2{0.0, 0.0}; };
  return m;
}

void FluxModel::sample_constants(double halfwidth, double ulo, double uhi, int samples,
                                 double* lip_ratio, double* speed_ratio) const {
  double worst_quot = 0, worst_speed = 0;
  const int n = std::max(3, samples);
  auto coord = [&](int i) { return -halfwidth + 2.0 * halfwidth * i / (n - 1); };
  for (int iu = 0; iu < n; ++iu) {
    const double u = ulo + (uhi - ulo) * iu / (n - 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < (dim == 2 ? n : 1); ++j) {
        Vec2 x{coord(i), dim == 2 ? coord(j) : 0.0};
        Vec2 g = dflux_du(0.0, x, u);
        worst_speed = std::max(worst_speed, norm(g));
        Vec2 x2{coord((i + 1) % n), dim == 2 ? coord((j + 1) % n) : 0.0};
        const double dx = norm(x2 - x);
        if (dx > 1e-12) {
          Vec2 g2 = dflux_du(0.0, x2, u);
          worst_quot = std::max(worst_quot, norm(g2 - g) / dx);
        }
      }
    }
  }
  if (lip_ratio) *lip_ratio = lip_x > 0 ? worst_quot / lip_x : (worst_quot == 0 ? 0.0 : 1e30);
  if (speed_ratio) *speed_ratio = speed_bound > 0 ? worst_speed / speed_bound : (worst_speed == 0 ? 0.0 : 1e30);
}

}  // namespace fnl
