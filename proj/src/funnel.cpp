#include "fnl/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fnl/raster_io.hpp"
#include "json.hpp"

namespace fnl {

namespace {

// Sub-cell level raster for a seed set: signed center-distance shifted by
// half a cell so the zero crossing sits on the region boundary.
std::vector<double> seed_level(const GridSet& k) {
  if (k.has_level()) return k.level;
  const double half = 0.5 * k.grid.spacing;
  auto din = detail::edt_squared_of_mask(k.grid, k.mask);
  std::vector<std::uint8_t> comp(k.mask.size());
  for (size_t i = 0; i < comp.size(); ++i) comp[i] = k.mask[i] ? 0 : 1;
  std::vector<double> out(k.mask.size());
  bool comp_empty = std::all_of(comp.begin(), comp.end(), [](std::uint8_t m) { return !m; });
  if (comp_empty) throw PreconditionError("funnel: seed set covers the whole grid");
  auto dout = detail::edt_squared_of_mask(k.grid, comp);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = k.mask[i] ? half - std::sqrt(dout[i]) : std::sqrt(din[i]) - half;
  return out;
}

// Sample points of a displaced velocity set dt*S dense enough that the
// morphological minimum over the samples tracks the minimum over the set:
// all vertices, edges subdivided at ~h/6, interior on a ~h/3 grid.
std::vector<Vec2> displacement_net(const VelocitySet& s, double dt, double h) {
  std::vector<Vec2> out;
  if (s.dim == 1) {
    const double lo = dt * s.vmin, hi = dt * s.vmax;
    if (hi - lo < 1e-15) return {{lo, 0.0}};
    int n = std::min(65, std::max(2, (int)std::ceil((hi - lo) / (h / 4.0)) + 1));
    for (int i = 0; i < n; ++i) out.push_back({lo + (hi - lo) * i / (n - 1), 0.0});
    return out;
  }
  std::vector<Vec2> v;
  v.reserve(s.hull.size());
  for (Vec2 p : s.hull) v.push_back(dt * p);
  if (v.size() == 1) return v;
  const double de = h / 6.0;
  const int m = static_cast<int>(v.size());
  for (int i = 0; i < m; ++i) {
    Vec2 a = v[i], b = v[(i + 1) % m];
    if (m == 2 && i == 1) break;  // segment: one edge
    const double len = norm(b - a);
    const int sub = std::min(24, std::max(1, (int)std::ceil(len / de)));
    for (int j = 0; j < sub; ++j) out.push_back(a + (j / (double)sub) * (b - a));
  }
  if (m == 2) out.push_back(v[1]);
  if (m >= 3) {
    // Interior samples: catches minima of the interpolated level that sit
    // away from the set boundary.
    double xlo = v[0][0], xhi = v[0][0], ylo = v[0][1], yhi = v[0][1];
    for (Vec2 p : v) {
      xlo = std::min(xlo, p[0]);
      xhi = std::max(xhi, p[0]);
      ylo = std::min(ylo, p[1]);
      yhi = std::max(yhi, p[1]);
    }
    const double pitch = h / 3.0;
    auto inside = [&](Vec2 p) {
      for (int i = 0; i < m; ++i) {
        Vec2 a = v[i], b = v[(i + 1) % m];
        if ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < -1e-14) return false;
      }
      return true;
    };
    for (double y = ylo + 0.5 * pitch; y < yhi; y += pitch)
      for (double x = xlo + 0.5 * pitch; x < xhi; x += pitch)
        if (inside({x, y})) out.push_back({x, y});
  }
  return out;
}

// Rebuild a unit-slope level around the current zero contour.  Advected
// levels steepen wherever the field compresses, and interpolation then chews
// through the thinned wells until inner cells flip sign; re-anchoring the
// slope after every step stops that without moving the contour (interface
// cells keep their interpolated crossing positions, so no sign changes).
void redistance(const Grid& g, std::vector<double>& level) {
  const int nx = g.extents[0], ny = g.extents[1];
  const double h = g.spacing;
  std::vector<double> d(level.size(), 1e300);
  std::vector<std::uint8_t> iface(level.size(), 0);
  auto visit = [&](int i, int j) {
    const bool ii = level[i] <= 0, ij = level[j] <= 0;
    if (ii == ij) return;
    const double den = std::abs(level[i] - level[j]);
    const double di = den > 0 ? h * std::abs(level[i]) / den : 0.5 * h;
    d[i] = std::min(d[i], di);
    d[j] = std::min(d[j], h - di);
    iface[i] = iface[j] = 1;
  };
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int i = ix + nx * iy;
      if (ix + 1 < nx) visit(i, i + 1);
      if (iy + 1 < ny) visit(i, i + nx);
    }
  if (std::none_of(iface.begin(), iface.end(), [](std::uint8_t f) { return f != 0; })) return;
  auto far2 = detail::edt_squared_of_mask(g, iface);
  for (size_t i = 0; i < level.size(); ++i) {
    const double dist = iface[i] ? d[i] : std::sqrt(far2[i]);
    level[i] = level[i] <= 0 ? -dist : std::max(dist, 1e-300);
  }
}

inline double bilerp_clamped(const Grid& g, const std::vector<double>& v, Vec2 p) {
  double fx = (p[0] - g.origin[0]) / g.spacing - 0.5;
  double fy = (p[1] - g.origin[1]) / g.spacing - 0.5;
  int i0 = (int)std::floor(fx), j0 = (int)std::floor(fy);
  i0 = std::max(0, std::min(g.extents[0] - 2, i0));
  j0 = std::max(0, std::min(g.extents[1] - 2, j0));
  double tx = std::min(1.0, std::max(0.0, fx - i0));
  double ty = std::min(1.0, std::max(0.0, fy - j0));
  const int nx = g.extents[0];
  const double v00 = v[i0 + nx * j0], v10 = v[i0 + 1 + nx * j0];
  const double v01 = v[i0 + nx * (j0 + 1)], v11 = v[i0 + 1 + nx * (j0 + 1)];
  return (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
}

void guard_slice(const GridSet& s, int step) {
  if (s.empty())
    throw EmptySetError("funnel: slice became empty at step " + std::to_string(step));
  const Grid& g = s.grid;
  const int ring = 2;
  for (int iy = 0; iy < g.extents[1]; ++iy)
    for (int ix = 0; ix < g.extents[0]; ++ix) {
      const bool border = ix < ring || ix >= g.extents[0] - ring ||
                          (g.dim == 2 && (iy < ring || iy >= g.extents[1] - ring));
      if (border && s.mask[g.index(ix, iy)])
        throw SupportOverflowError("funnel: slice reached the grid border at step " +
                                   std::to_string(step));
    }
}

GridSet slice_from_level(const Grid& g, const std::vector<double>& level) {
  GridSet s(g);
  s.level = level;
  for (size_t i = 0; i < level.size(); ++i) s.mask[i] = level[i] <= 0.0 ? 1 : 0;
  return s;
}

// Maximal runs of set cells as sub-cell intervals: endpoints from the level's
// zero crossings when present, half a cell beyond the outer centers otherwise.
std::vector<Vec2> interval_components(const GridSet& s) {
  const Grid& g = s.grid;
  const int nx = g.extents[0];
  std::vector<Vec2> comps;
  int run = -1;
  for (int ix = 0; ix <= nx; ++ix) {
    const bool in = ix < nx && s.mask[ix];
    if (in && run < 0) run = ix;
    if (!in && run >= 0) {
      double l = g.center(run, 0)[0] - 0.5 * g.spacing;
      double r = g.center(ix - 1, 0)[0] + 0.5 * g.spacing;
      if (s.has_level()) {
        if (run > 0 && s.level[run - 1] > s.level[run]) {
          const double f = s.level[run - 1] / (s.level[run - 1] - s.level[run]);
          l = g.center(run - 1, 0)[0] + f * g.spacing;
        }
        if (ix < nx && s.level[ix] > s.level[ix - 1]) {
          const double f = s.level[ix] / (s.level[ix] - s.level[ix - 1]);
          r = g.center(ix, 0)[0] - f * g.spacing;
        }
      }
      comps.push_back({l, r});
      run = -1;
    }
  }
  return comps;
}

// 1D reachable sets of interval unions stay interval unions, so the funnel
// reduces to endpoint dynamics: l' = min F(t,l), r' = max F(t,r).  Midpoint
// steps keep the error at O(dt^2) per step with no grid resampling at all.
Funnel propagate_intervals_1d(const VelocityProvider& field, const GridSet& seed,
                              const std::vector<double>& times) {
  const Grid& g = seed.grid;
  if (std::all_of(seed.mask.begin(), seed.mask.end(), [](std::uint8_t m) { return m != 0; }))
    throw PreconditionError("funnel: seed set covers the whole grid");
  std::vector<Vec2> comps = interval_components(seed);

  auto vmin = [&](double t, double x) { return field.at(t, {x, 0.0}).vmin; };
  auto vmax = [&](double t, double x) { return field.at(t, {x, 0.0}).vmax; };

  Funnel out;
  out.direction = Direction::Forward;
  out.times = times;
  auto emit = [&](int k) {
    std::vector<double> level(g.cell_count());
    for (int ix = 0; ix < g.extents[0]; ++ix) {
      const double y = g.center(ix, 0)[0];
      double best = 1e300;
      for (Vec2 c : comps) best = std::min(best, std::max(c[0] - y, y - c[1]));
      level[ix] = best;
    }
    out.slices.push_back(slice_from_level(g, level));
    guard_slice(out.slices.back(), k);
  };
  emit(0);

  for (size_t k = 1; k < times.size(); ++k) {
    const double t = times[k - 1], step = times[k] - times[k - 1];
    for (Vec2& c : comps) {
      const double lmid = c[0] + 0.5 * step * vmin(t, c[0]);
      const double rmid = c[1] + 0.5 * step * vmax(t, c[1]);
      c[0] += step * vmin(t + 0.5 * step, lmid);
      c[1] += step * vmax(t + 0.5 * step, rmid);
    }
    // Drop collapsed components, merge touching ones.
    std::vector<Vec2> merged;
    for (Vec2 c : comps) {
      if (c[1] < c[0]) continue;
      if (!merged.empty() && c[0] <= merged.back()[1])
        merged.back()[1] = std::max(merged.back()[1], c[1]);
      else
        merged.push_back(c);
    }
    comps.swap(merged);
    if (comps.empty())
      throw EmptySetError("funnel: slice became empty at step " + std::to_string(k));
    emit(static_cast<int>(k));
  }
  return out;
}

// Reversal wrapper: \hat F(t,y) = -F(tau+tau0-t, y).
class ReversedProvider : public VelocityProvider {
 public:
  ReversedProvider(const VelocityProvider& base, double tsum) : base_(base), tsum_(tsum) {}
  int dim() const override { return base_.dim(); }
  VelocitySet at(double t, Vec2 x) const override {
    return negate(base_.at(tsum_ - t, x));
  }
  bool separable() const override { return base_.separable(); }
  VelocitySet shape(double t) const override { return negate(base_.shape(tsum_ - t)); }
  Vec2 drift(double t, Vec2 x) const override { return -1.0 * base_.drift(tsum_ - t, x); }
  double speed_bound() const override { return base_.speed_bound(); }
  double isotropic_radius() const override { return base_.isotropic_radius(); }
  bool constant_velocity(Vec2& v) const override {
    if (!base_.constant_velocity(v)) return false;
    v = -1.0 * v;
    return true;
  }

 private:
  static VelocitySet negate(const VelocitySet& s) {
    if (s.dim == 1) return VelocitySet::interval(-s.vmax, -s.vmin);
    VelocitySet out;
    out.dim = 2;
    out.hull.reserve(s.hull.size());
    // Point reflection is a half-turn, so CCW order is preserved.
    for (Vec2 p : s.hull) out.hull.push_back(-1.0 * p);
    return out;
  }
  const VelocityProvider& base_;
  double tsum_;
};

}  // namespace

VelocitySet FluxProvider::shape(double t) const {
  if (!flux_.separable) return VelocityProvider::shape(t);
  const double a = env_.a(t), b = env_.b(t);
  if (!(a <= b)) throw PreconditionError("funnel: envelope has a(t) > b(t)");
  const int n = std::max(2, nsamp_);
  if (flux_.dim == 1) {
    double lo = 0, hi = 0;
    for (int i = 0; i < n; ++i) {
      const double u = a + (b - a) * i / (n - 1);
      const double w = flux_.ushape(t, u)[0];
      if (i == 0)
        lo = hi = w;
      else {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      }
    }
    return VelocitySet::interval(lo, hi);
  }
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(flux_.ushape(t, a + (b - a) * i / (n - 1)));
  return VelocitySet::polygon(std::move(pts));
}

VelocitySet IsotropicProvider::shape(double) const {
  if (dim_ == 1) return VelocitySet::interval(-c_, c_);
  if (c_ == 0) return VelocitySet::singleton({0, 0}, 2);
  std::vector<Vec2> pts;
  const int n = std::max(8, nverts_);
  pts.reserve(n);
  // Circumscribed polygon: contains the ball, keeps the estimate outer.
  const double rr = c_ / std::cos(M_PI / n);
  for (int i = 0; i < n; ++i) {
    const double ang = 2.0 * M_PI * i / n;
    pts.push_back({rr * std::cos(ang), rr * std::sin(ang)});
  }
  return VelocitySet::polygon(std::move(pts));
}

Funnel propagate_funnel(const VelocityProvider& field, const GridSet& seed, double tau0,
                        double tau, double dt, Direction direction) {
  if (!(tau > tau0)) throw PreconditionError("funnel: need tau > tau0");
  if (!(dt > 0)) throw PreconditionError("funnel: need dt > 0");
  if (seed.empty()) throw EmptySetError("funnel: empty seed set");
  const Grid& g = seed.grid;
  if (field.dim() != g.dim) throw GridMismatchError("funnel: provider/grid dimension mismatch");

  if (direction == Direction::Backward) {
    ReversedProvider rev(field, tau + tau0);
    Funnel fwd = propagate_funnel(rev, seed, tau0, tau, dt, Direction::Forward);
    Funnel out;
    out.direction = Direction::Backward;
    out.times = fwd.times;  // ascending tau0..tau
    out.slices.assign(fwd.slices.rbegin(), fwd.slices.rend());
    return out;
  }

  const double cmax = field.speed_bound();
  if (dt * cmax > g.spacing * (1.0 + 1e-9))
    throw CflViolationError("funnel: dt * speed exceeds spacing");

  const int steps = std::max(1, (int)std::ceil((tau - tau0) / dt - 1e-9));
  const double step = (tau - tau0) / steps;

  Funnel out;
  out.direction = Direction::Forward;
  out.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) out.times[k] = tau0 + step * k;
  out.times.back() = tau;

  // 1D seeds are interval unions and stay that way, so track endpoints
  // analytically instead of resampling a level grid; repeated resampling
  // erodes V-shaped levels near their kinks and pulls point-seeded funnel
  // boundaries inward by O(spacing * sqrt(steps)).
  if (g.dim == 1) return propagate_intervals_1d(field, seed, out.times);

  std::vector<double> level = seed_level(seed);
  out.slices.push_back(slice_from_level(g, level));
  guard_slice(out.slices.front(), 0);

  const bool fast = field.separable();
  std::vector<double> next(level.size());
  const int nx = g.extents[0], ny = g.extents[1];

  // Structure-aware paths (see the VelocityProvider hints): balls update the
  // level algebraically and constant translations resample the seed once per
  // slice, so neither accumulates interpolation error across steps.
  const double iso = field.isotropic_radius();
  Vec2 cvel{0, 0};
  const bool translation = field.constant_velocity(cvel);
  if (iso >= 0 || translation) {
    for (int k = 1; k <= steps; ++k) {
      const double elapsed = out.times[k] - tau0;
      if (iso >= 0) {
        for (size_t i = 0; i < level.size(); ++i) next[i] = level[i] - iso * elapsed;
      } else {
        for (int iy = 0; iy < ny; ++iy)
          for (int ix = 0; ix < nx; ++ix)
            next[g.index(ix, iy)] = bilerp_clamped(g, level, g.center(ix, iy) - elapsed * cvel);
      }
      out.slices.push_back(slice_from_level(g, next));
      guard_slice(out.slices.back(), k);
    }
    return out;
  }

  for (int k = 0; k < steps; ++k) {
    const double tmid = out.times[k] + 0.5 * step;  // sets sampled mid-step
    std::vector<Vec2> net;
    if (fast) net = displacement_net(field.shape(tmid), step, g.spacing);
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        Vec2 pos = g.center(ix, iy);
        Vec2 off = fast ? step * field.drift(tmid, pos) : Vec2{0, 0};
        std::vector<Vec2> local;
        const std::vector<Vec2>& pts =
            fast ? net
                 : (local = displacement_net(field.at(tmid, pos), step, g.spacing), local);
        double best = 1e300;
        const Vec2 base = pos - off;
        for (Vec2 d : pts) best = std::min(best, bilerp_clamped(g, level, base - d));
        next[g.index(ix, iy)] = best;
      }
    level.swap(next);
    redistance(g, level);
    out.slices.push_back(slice_from_level(g, level));
    guard_slice(out.slices.back(), k + 1);
  }
  return out;
}

Funnel propagate_funnel(const FluxModel& flux, const GridSet& seed, const BoundsEnvelope& env,
                        double tau0, double tau, double dt, Direction direction, int nsamp) {
  FluxProvider provider(flux, env, nsamp);
  return propagate_funnel(provider, seed, tau0, tau, dt, direction);
}

std::vector<ConvergenceRow> funnel_convergence(const FluxModel& flux, const GridSet& seed,
                                               const BoundsEnvelope& env, double tau0,
                                               double tau, double dt,
                                               const std::vector<double>& steps,
                                               Direction direction, int nsamp) {
  Funnel ref = propagate_funnel(flux, seed, env, tau0, tau, dt, direction, nsamp);
  std::vector<ConvergenceRow> rows;
  for (double h : steps) {
    BoundsEnvelope stair = BoundsEnvelope::piecewise(env, h);
    Funnel fh = propagate_funnel(flux, seed, stair, tau0, tau, dt, direction, nsamp);
    ConvergenceRow row;
    row.step_width = h;
    for (size_t i = 0; i < ref.slices.size(); ++i) {
      const double sd = sym_diff_measure(fh.slices[i], ref.slices[i]);
      row.max_sym_diff = std::max(row.max_sym_diff, sd);
      if (i + 1 == ref.slices.size()) row.final_sym_diff = sd;
    }
    rows.push_back(row);
  }
  return rows;
}

ResidualStats proximal_residual(const Funnel& funnel, const VelocityProvider& field) {
  const int m = static_cast<int>(funnel.slices.size());
  if (m < 3) throw PreconditionError("proximal_residual: need at least three slices");
  const Grid& g = funnel.slices.front().grid;
  const double dt = funnel.dt();
  const int nx = g.extents[0], ny = g.extents[1];
  const int cells = g.cell_count();

  // Differentiate the slice level rasters when every slice carries one: the
  // ratio theta/|zeta| is invariant under monotone rescaling of the level, so
  // any sub-cell function with the front as its zero set gives the normal
  // condition exactly, without the staircase noise of mask distances.
  bool have_levels = true;
  for (const GridSet& sl : funnel.slices) have_levels = have_levels && sl.has_level();

  // Fallback: space-time signed distance of the mask stack, time as an axis.
  std::vector<double> s;
  if (!have_levels) {
    std::vector<double> fin(static_cast<size_t>(cells) * m), fout(fin.size());
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < cells; ++i) {
        const bool in = funnel.slices[k].mask[i] != 0;
        fin[i + (size_t)cells * k] = in ? 0.0 : detail::kInfDist;
        fout[i + (size_t)cells * k] = in ? detail::kInfDist : 0.0;
      }
    const std::vector<int> ext{nx, ny, m};
    const std::vector<double> sp{g.spacing, g.spacing, dt};
    detail::edt_squared(fin, ext, sp);
    detail::edt_squared(fout, ext, sp);
    s.resize(fin.size());
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < cells; ++i) {
        const size_t idx = i + (size_t)cells * k;
        s[idx] = funnel.slices[k].mask[i] ? -std::sqrt(fout[idx]) : std::sqrt(fin[idx]);
      }
  }

  auto at = [&](int ix, int iy, int k) -> double {
    const size_t idx = static_cast<size_t>(g.index(ix, iy));
    return have_levels ? funnel.slices[k].level[idx] : s[idx + (size_t)cells * k];
  };
  auto in_body = [&](int ix, int iy, int k) { return funnel.slices[k].mask[g.index(ix, iy)]; };

  const bool backward = funnel.direction == Direction::Backward;
  std::vector<double> res;
  int skipped = 0;
  for (int k = 1; k < m - 1; ++k) {
    for (int iy = (g.dim == 2 ? 1 : 0); iy < (g.dim == 2 ? ny - 1 : 1); ++iy)
      for (int ix = 1; ix < nx - 1; ++ix) {
        if (!in_body(ix, iy, k)) continue;
        bool boundary = !in_body(ix - 1, iy, k) || !in_body(ix + 1, iy, k) ||
                        !in_body(ix, iy, k - 1) || !in_body(ix, iy, k + 1);
        if (g.dim == 2)
          boundary = boundary || !in_body(ix, iy - 1, k) || !in_body(ix, iy + 1, k);
        if (!boundary) continue;
        const double gt = (at(ix, iy, k + 1) - at(ix, iy, k - 1)) / (2 * dt);
        const double gx = (at(ix + 1, iy, k) - at(ix - 1, iy, k)) / (2 * g.spacing);
        const double gy =
            g.dim == 2 ? (at(ix, iy + 1, k) - at(ix, iy - 1, k)) / (2 * g.spacing) : 0.0;
        const double zn = std::hypot(gx, gy);
        const double total = std::sqrt(gt * gt + zn * zn);
        if (zn < 0.1 * std::max(total, 1e-12)) {
          ++skipped;
          continue;
        }
        const Vec2 zeta{gx / zn, gy / zn};
        const double theta = gt / zn;
        VelocitySet f = field.at(funnel.times[k], g.center(ix, iy));
        const double r = backward ? std::abs(-theta + hamiltonian(f, -1.0 * zeta))
                                  : std::abs(theta + hamiltonian(f, zeta));
        res.push_back(r);
      }
  }

  ResidualStats st;
  st.evaluated = static_cast<int>(res.size());
  st.skipped = skipped;
  if (res.empty()) return st;
  std::sort(res.begin(), res.end());
  st.median = res[res.size() / 2];
  st.p90 = res[std::min(res.size() - 1, (size_t)(0.9 * res.size()))];
  st.max = res.back();
  double sum = 0;
  for (double r : res) sum += r;
  st.mean = sum / res.size();
  return st;
}

ResidualStats proximal_residual(const Funnel& funnel, const FluxModel& flux,
                                const BoundsEnvelope& env, int nsamp) {
  FluxProvider provider(flux, env, nsamp);
  return proximal_residual(funnel, provider);
}

void save_funnel(const Funnel& funnel, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json index;
  index["direction"] = funnel.direction == Direction::Forward ? "forward" : "backward";
  index["times"] = funnel.times;
  const Grid& g = funnel.slices.front().grid;
  index["grid"] = {{"dim", g.dim},
                   {"origin", {g.origin[0], g.origin[1]}},
                   {"spacing", g.spacing},
                   {"extents", {g.extents[0], g.extents[1]}}};
  nlohmann::json slices = nlohmann::json::array();
  for (size_t i = 0; i < funnel.slices.size(); ++i) {
    char maskname[32], levelname[32];
    std::snprintf(maskname, sizeof maskname, "slice_%04zu.mask", i);
    std::snprintf(levelname, sizeof levelname, "slice_%04zu.level", i);
    save_mask(funnel.slices[i], (fs::path(dir) / maskname).string());
    nlohmann::json entry{{"mask", maskname}};
    if (funnel.slices[i].has_level()) {
      Raster r(g);
      r.values = funnel.slices[i].level;
      save_values(r, (fs::path(dir) / levelname).string());
      entry["level"] = levelname;
    }
    slices.push_back(entry);
  }
  index["slices"] = slices;
  std::ofstream os(fs::path(dir) / "index.json");
  os << index.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write funnel index in " + dir);
}

Funnel load_funnel(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "index.json");
  if (!is) throw std::runtime_error("cannot read funnel index in " + dir);
  nlohmann::json index = nlohmann::json::parse(is);
  Funnel f;
  f.direction =
      index.at("direction").get<std::string>() == "backward" ? Direction::Backward : Direction::Forward;
  f.times = index.at("times").get<std::vector<double>>();
  for (const auto& entry : index.at("slices")) {
    GridSet s = load_mask((fs::path(dir) / entry.at("mask").get<std::string>()).string());
    if (entry.contains("level")) {
      Raster r = load_values((fs::path(dir) / entry.at("level").get<std::string>()).string());
      s.level = std::move(r.values);
    }
    f.slices.push_back(std::move(s));
  }
  if (f.slices.size() != f.times.size())
    throw PreconditionError("funnel index: slice/time count mismatch in " + dir);
  return f;
}

}  // namespace fnl
