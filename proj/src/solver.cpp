#include "fnl/solver.hpp"

#include <algorithm>
#include <cmath>

namespace fnl {

namespace {

// One conservative sweep along an axis with outflow ghosts: interface flux
// 0.5*(f(uL)+f(uR)) - 0.5*a*(uR-uL) at the interface midpoint, with
// a = max |∂f/∂u| over the two cell values.
struct AxisSweep {
  const FluxModel* flux;
  int axis = 0;

  // u holds n entries along the line and is updated in place; center_of(i)
  // returns cell i's center.  Returns the largest interface speed seen.
  template <class CenterOf>
  double step(double* u, double* fhat, int n, double t, double dt, double h,
              CenterOf&& center_of) const {
    auto value = [&](int i) { return u[std::max(0, std::min(n - 1, i))]; };
    double worst = 0;
    for (int i = 0; i <= n; ++i) {
      const double ul = value(i - 1), ur = value(i);
      Vec2 xm;
      if (i == 0) {
        xm = center_of(0);
        xm[axis] -= 0.5 * h;
      } else if (i == n) {
        xm = center_of(n - 1);
        xm[axis] += 0.5 * h;
      } else {
        Vec2 cl = center_of(i - 1), cr = center_of(i);
        xm = {0.5 * (cl[0] + cr[0]), 0.5 * (cl[1] + cr[1])};
      }
      const double a = std::max(std::abs(flux->dflux_du(t, xm, ul)[axis]),
                                std::abs(flux->dflux_du(t, xm, ur)[axis]));
      worst = std::max(worst, a);
      fhat[i] =
          0.5 * (flux->flux(t, xm, ul)[axis] + flux->flux(t, xm, ur)[axis]) - 0.5 * a * (ur - ul);
    }
    const double lam = dt / h;
    for (int i = 0; i < n; ++i) u[i] -= lam * (fhat[i + 1] - fhat[i]);
    return worst;
  }
};

double max_wave_speed(const FluxModel& flux, const Field& u, double t) {
  const Grid& g = u.grid;
  double worst = 0;
  for (int i = 0; i < g.cell_count(); ++i) {
    Vec2 d = flux.dflux_du(t, g.center(i), u.values[i]);
    worst = std::max(worst, std::max(std::abs(d[0]), std::abs(d[1])));
  }
  return worst;
}

void border_guard(const Field& u, double tol) {
  const Grid& g = u.grid;
  const int nx = g.extents[0], ny = g.extents[1];
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const bool border =
          ix == 0 || ix == nx - 1 || (g.dim == 2 && (iy == 0 || iy == ny - 1));
      if (border && std::abs(u.values[g.index(ix, iy)]) > tol)
        throw SupportOverflowError("solve: support reached the grid border at t = " +
                                   std::to_string(u.time));
    }
}

}  // namespace

Trajectory solve(const FluxModel& flux, const Field& u0, double T, const SchemeConfig& cfg) {
  if (!(cfg.cfl > 0) || cfg.cfl > 0.5)
    throw CflViolationError("solve: cfl must lie in (0, 0.5]");
  if (!(T >= 0)) throw PreconditionError("solve: need T >= 0");
  const Grid& g = u0.grid;
  if (flux.dim != g.dim) throw GridMismatchError("solve: flux/grid dimension mismatch");
  if ((int)u0.values.size() != g.cell_count())
    throw GridMismatchError("solve: field size does not match grid");

  // Times the stepper must land on exactly (checkpoints plus the end).
  std::vector<double> stops = cfg.checkpoints;
  const double t_end = u0.time + T;
  stops.push_back(t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::remove_if(stops.begin(), stops.end(),
                             [&](double s) { return s <= u0.time + 1e-12 || s > t_end + 1e-12; }),
              stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              stops.end());

  Trajectory traj;
  traj.flux_name = flux.name;
  traj.cfl = cfg.cfl;
  traj.fields.push_back(u0);
  border_guard(u0, cfg.support_tol);
  if (T == 0) return traj;

  const double h = g.spacing;
  const double speed0 = std::max(max_wave_speed(flux, u0, u0.time), 1e-12);
  const long est_steps = std::lround(std::ceil(T * speed0 / (cfg.cfl * h)));
  const long stride = std::max(1L, est_steps / std::max(1, cfg.max_snapshots - 2));

  Field cur = u0;
  const int nx = g.extents[0], ny = g.extents[1];
  std::vector<double> fhat(std::max(nx, ny) + 1);
  std::vector<double> line(std::max(nx, ny));
  size_t next_stop = 0;
  long step_idx = 0;

  while (cur.time < t_end - 1e-12) {
    const double speed = std::max(max_wave_speed(flux, cur, cur.time), 1e-12);
    double dt = cfg.cfl * h / speed;
    bool at_stop = false;
    if (next_stop < stops.size() && cur.time + dt >= stops[next_stop] - 1e-12) {
      dt = stops[next_stop] - cur.time;
      at_stop = true;
    }
    traj.worst_cfl_used = std::max(traj.worst_cfl_used, dt * speed / h);

    const double t = cur.time;
    if (g.dim == 1) {
      AxisSweep sweep{&flux, 0};
      sweep.step(cur.values.data(), fhat.data(), nx, t, dt, h,
                 [&](int i) { return g.center(i, 0); });
    } else {
      AxisSweep sx{&flux, 0}, sy{&flux, 1};
      auto sweep_x = [&](double tt, double dtt) {
        for (int iy = 0; iy < ny; ++iy) {
          double* row = cur.values.data() + (size_t)iy * nx;
          sx.step(row, fhat.data(), nx, tt, dtt, h, [&](int i) { return g.center(i, iy); });
        }
      };
      auto sweep_y = [&](double tt, double dtt) {
        for (int ix = 0; ix < nx; ++ix) {
          for (int iy = 0; iy < ny; ++iy) line[iy] = cur.values[g.index(ix, iy)];
          sy.step(line.data(), fhat.data(), ny, tt, dtt, h,
                  [&](int i) { return g.center(ix, i); });
          for (int iy = 0; iy < ny; ++iy) cur.values[g.index(ix, iy)] = line[iy];
        }
      };
      // Strang split: x half step, y full step, x half step.
      sweep_x(t, 0.5 * dt);
      sweep_y(t + 0.25 * dt, dt);
      sweep_x(t + 0.75 * dt, 0.5 * dt);
    }
    cur.time = at_stop ? stops[next_stop] : cur.time + dt;
    ++step_idx;
    border_guard(cur, cfg.support_tol);

    const bool store = at_stop || step_idx % stride == 0;
    if (at_stop) ++next_stop;
    if (store) traj.fields.push_back(cur);
  }
  traj.steps_taken = static_cast<int>(step_idx);
  if (std::abs(traj.fields.back().time - t_end) > 1e-12) traj.fields.push_back(cur);
  return traj;
}

double l1_distance(const Field& u, const Field& v, const GridSet& k) {
  require_same_grid(u.grid, v.grid, "l1_distance");
  require_same_grid(u.grid, k.grid, "l1_distance");
  if (std::abs(u.time - v.time) > 1e-9)
    throw PreconditionError("l1_distance: fields at different times");
  double sum = 0;
  for (size_t i = 0; i < k.mask.size(); ++i)
    if (k.mask[i]) sum += std::abs(u.values[i] - v.values[i]);
  return sum * u.grid.cell_volume();
}

double total_mass(const Field& u) {
  double sum = 0;
  for (double v : u.values) sum += v;
  return sum * u.grid.cell_volume();
}

BoundsReport verify_bounds(const Trajectory& traj, const BoundsEnvelope& env, double tol) {
  BoundsReport rep;
  for (const Field& f : traj.fields) {
    const double t = f.time - traj.fields.front().time;
    const double lo = env.a(t) - tol, hi = env.b(t) + tol;
    for (double v : f.values) {
      const double excess = std::max(lo - v, v - hi);
      if (excess > rep.worst_violation) {
        rep.worst_violation = excess;
        rep.worst_time = f.time;
      }
    }
  }
  rep.pass = rep.worst_violation <= 0;
  return rep;
}

double total_variation(const Field& u) {
  if (u.grid.dim != 1) throw PreconditionError("total_variation: 1D only");
  double tv = 0;
  for (int i = 0; i + 1 < u.grid.extents[0]; ++i)
    tv += std::abs(u.values[i + 1] - u.values[i]);
  return tv;
}

}  // namespace fnl
