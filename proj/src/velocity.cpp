#include "fnl/velocity.hpp"

#include <algorithm>
#include <cmath>

namespace fnl {

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n <= 2) return pts;
  auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec2> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {  // upper chain
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

VelocitySet VelocitySet::polygon(std::vector<Vec2> points) {
  if (points.empty()) throw PreconditionError("velocity set: no points");
  VelocitySet s;
  s.dim = 2;
  s.hull = convex_hull(std::move(points));
  return s;
}

double VelocitySet::speed() const {
  if (dim == 1) return std::max(std::abs(vmin), std::abs(vmax));
  double best = 0;
  for (const Vec2& v : hull) best = std::max(best, norm(v));
  return best;
}

VelocitySet VelocitySet::translated(Vec2 off) const {
  VelocitySet s = *this;
  if (dim == 1) {
    s.vmin += off[0];
    s.vmax += off[0];
  } else {
    for (Vec2& v : s.hull) v = v + off;
  }
  return s;
}

double hamiltonian(const VelocitySet& f, Vec2 p) {
  if (f.dim == 1) return std::max(p[0] * f.vmin, p[0] * f.vmax);
  if (f.hull.empty()) throw EmptySetError("hamiltonian: empty velocity set");
  double best = -1e300;
  for (const Vec2& v : f.hull) best = std::max(best, dot(p, v));
  return best;
}

VelocitySet velocity_set(const FluxModel& flux, double t, Vec2 x, const BoundsEnvelope& env,
                         int nsamp) {
  const double a = env.a(t), b = env.b(t);
  if (!(a <= b)) throw PreconditionError("velocity_set: envelope has a(t) > b(t)");
  nsamp = std::max(nsamp, 2);
  if (flux.dim == 1) {
    double lo = 0, hi = 0;
    for (int i = 0; i < nsamp; ++i) {
      const double u = a + (b - a) * i / (nsamp - 1);
      const double v = flux.dflux_du(t, x, u)[0];
      if (i == 0) {
        lo = hi = v;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return VelocitySet::interval(lo, hi);
  }
  std::vector<Vec2> pts;
  pts.reserve(nsamp);
  for (int i = 0; i < nsamp; ++i) {
    const double u = a + (b - a) * i / (nsamp - 1);
    pts.push_back(flux.dflux_du(t, x, u));
  }
  return VelocitySet::polygon(std::move(pts));
}

}  // namespace fnl
