#include "fnl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fnl {

namespace detail {

namespace {

// 1D squared-distance transform along samples at positions i*w.
// d[i] = min_j ( (i-j)^2 w^2 + f[j] ).  v/z are scratch of size n, n+1.
void dt_axis(const double* f, double* d, int n, double w, int* v, double* z) {
  const double w2 = w * w;
  int k = 0;
  v[0] = 0;
  z[0] = -kInfDist;
  z[1] = kInfDist;
  for (int q = 1; q < n; ++q) {
    double s = 0;
    while (true) {
      const int p = v[k];
      // Intersection of parabolas rooted at q and p (in index units).
      s = ((f[q] / w2 + q * (double)q) - (f[p] / w2 + p * (double)p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k] && k == 0) {
      v[0] = q;  // q dominates everywhere
      z[0] = -kInfDist;
      z[1] = kInfDist;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInfDist;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = (double)(q - v[k]);
    d[q] = dq * dq * w2 + f[v[k]];
  }
}

}  // namespace

void edt_squared(std::vector<double>& f, const std::vector<int>& extents,
                 const std::vector<double>& spacing) {
  const int rank = static_cast<int>(extents.size());
  int total = 1;
  for (int e : extents) total *= e;
  int nmax = *std::max_element(extents.begin(), extents.end());
  std::vector<double> line(nmax), out(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  // Transform along each axis in turn; after all passes f holds exact
  // squared Euclidean distances.
  int stride = 1;
  for (int ax = 0; ax < rank; ++ax) {
    const int n = extents[ax];
    if (n > 1) {
      const int lines = total / n;
      for (int l = 0; l < lines; ++l) {
        // Base index of this line: decompose l over the remaining axes.
        int rem = l, base = 0, mul = 1;
        for (int a = 0; a < rank; ++a) {
          if (a == ax) {
            mul *= n;
            continue;
          }
          const int idx = rem % extents[a];
          rem /= extents[a];
          base += idx * mul;
          mul *= extents[a];
        }
        for (int i = 0; i < n; ++i) line[i] = f[base + i * stride];
        dt_axis(line.data(), out.data(), n, spacing[ax], v.data(), z.data());
        for (int i = 0; i < n; ++i) f[base + i * stride] = out[i];
      }
    }
    stride *= n;
  }
}

std::vector<double> edt_squared_of_mask(const Grid& g, const std::vector<std::uint8_t>& mask) {
  std::vector<double> f(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 0.0 : kInfDist;
  edt_squared(f, {g.extents[0], g.extents[1]}, {g.spacing, g.spacing});
  return f;
}

}  // namespace detail

Raster distance_field(const GridSet& a) {
  if (a.empty()) throw EmptySetError("distance_field: empty set");
  Raster r(a.grid);
  auto d2 = detail::edt_squared_of_mask(a.grid, a.mask);
  for (size_t i = 0; i < d2.size(); ++i) r.values[i] = std::sqrt(d2[i]);
  return r;
}

Raster signed_distance_field(const GridSet& a) {
  if (a.empty()) throw EmptySetError("signed_distance_field: empty set");
  Raster r(a.grid);
  auto din = detail::edt_squared_of_mask(a.grid, a.mask);
  std::vector<std::uint8_t> comp(a.mask.size());
  for (size_t i = 0; i < comp.size(); ++i) comp[i] = a.mask[i] ? 0 : 1;
  bool comp_empty = true;
  for (auto m : comp)
    if (m) {
      comp_empty = false;
      break;
    }
  if (comp_empty) {
    // Whole grid: inside everywhere, depth measured to the border.
    for (int iy = 0; iy < a.grid.extents[1]; ++iy)
      for (int ix = 0; ix < a.grid.extents[0]; ++ix) {
        int bx = std::min(ix + 1, a.grid.extents[0] - ix);
        int by = a.grid.dim == 1 ? bx : std::min(iy + 1, a.grid.extents[1] - iy);
        r.values[a.grid.index(ix, iy)] = -a.grid.spacing * std::min(bx, by);
      }
    return r;
  }
  auto dout = detail::edt_squared_of_mask(a.grid, comp);
  for (size_t i = 0; i < din.size(); ++i)
    r.values[i] = a.mask[i] ? -std::sqrt(dout[i]) : std::sqrt(din[i]);
  return r;
}

GridSet dilate(const GridSet& a, double r) {
  if (a.empty()) throw EmptySetError("dilate: empty set");
  if (r < 0) throw PreconditionError("dilate: negative radius");
  GridSet out(a.grid);
  auto d2 = detail::edt_squared_of_mask(a.grid, a.mask);
  const double r2 = r * r * (1.0 + 1e-9) + 1e-300;  // ties at r included
  for (size_t i = 0; i < d2.size(); ++i) out.mask[i] = d2[i] <= r2 ? 1 : 0;
  return out;
}

GridSet erode(const GridSet& a, double r) {
  if (r < 0) throw PreconditionError("erode: negative radius");
  GridSet comp = complement(a);
  if (comp.empty()) return a;  // full grid: nothing outside to eat in from
  auto d2 = detail::edt_squared_of_mask(a.grid, comp.mask);
  GridSet out(a.grid);
  const double r2 = r * r * (1.0 + 1e-9) + 1e-300;
  for (size_t i = 0; i < d2.size(); ++i) out.mask[i] = d2[i] <= r2 ? 0 : (a.mask[i] ? 1 : 0);
  return out;
}

bool is_tubular(const GridSet& a, double r, double tol) {
  if (a.empty()) return false;  // not a neighbourhood of anything
  GridSet core = erode(a, r);
  if (core.empty()) return false;
  GridSet opening = dilate(core, r);
  return hausdorff_distance(opening, a) <= tol;
}

double hausdorff_distance(const GridSet& a, const GridSet& b) {
  if (a.empty() || b.empty()) throw EmptySetError("hausdorff_distance: empty set");
  require_same_grid(a.grid, b.grid, "hausdorff_distance");
  auto da = detail::edt_squared_of_mask(a.grid, a.mask);
  auto db = detail::edt_squared_of_mask(b.grid, b.mask);
  double worst = 0;
  for (size_t i = 0; i < da.size(); ++i) {
    if (a.mask[i]) worst = std::max(worst, db[i]);
    if (b.mask[i]) worst = std::max(worst, da[i]);
  }
  return std::sqrt(worst);
}

double measure(const GridSet& a) { return a.count() * a.grid.cell_volume(); }

double sym_diff_measure(const GridSet& a, const GridSet& b) {
  require_same_grid(a.grid, b.grid, "sym_diff_measure");
  int n = 0;
  for (size_t i = 0; i < a.mask.size(); ++i) n += ((a.mask[i] != 0) != (b.mask[i] != 0));
  return n * a.grid.cell_volume();
}

double set_diameter(const GridSet& a) {
  if (a.empty()) throw EmptySetError("set_diameter: empty set");
  // Only boundary cells can realize the diameter.
  const Grid& g = a.grid;
  std::vector<Vec2> pts;
  for (int iy = 0; iy < g.extents[1]; ++iy)
    for (int ix = 0; ix < g.extents[0]; ++ix) {
      if (!a.mask[g.index(ix, iy)]) continue;
      bool border = ix == 0 || ix == g.extents[0] - 1 || !a.mask[g.index(ix - 1, iy)] ||
                    !a.mask[g.index(ix + 1, iy)];
      if (!border && g.dim == 2)
        border = iy == 0 || iy == g.extents[1] - 1 || !a.mask[g.index(ix, iy - 1)] ||
                 !a.mask[g.index(ix, iy + 1)];
      if (border) pts.push_back(g.center(ix, iy));
    }
  double best = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      Vec2 d = pts[i] - pts[j];
      best = std::max(best, dot(d, d));
    }
  return std::sqrt(best);
}

MinkowskiEstimate minkowski_content(const GridSet& a, std::vector<double> radii) {
  if (a.empty()) throw EmptySetError("minkowski_content: empty set");
  if (radii.size() < 2) throw PreconditionError("minkowski_content: need at least two radii");
  for (double r : radii)
    if (!(r > 2.0 * a.grid.spacing))
      throw PreconditionError("minkowski_content: every radius must exceed 2 * spacing");
  std::sort(radii.begin(), radii.end());

  auto d2 = detail::edt_squared_of_mask(a.grid, a.mask);
  const double vol = a.grid.cell_volume();
  MinkowskiEstimate est;
  for (double r : radii) {
    const double r2 = r * r * (1.0 + 1e-9);
    int shell = 0;
    for (size_t i = 0; i < d2.size(); ++i) shell += (!a.mask[i] && d2[i] <= r2);
    est.table.emplace_back(r, shell * vol / r);
  }
  // Least-squares line q(r) = content + slope * r.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(est.table.size());
  for (auto [x, y] : est.table) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  est.slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
  est.content = (sy - est.slope * sx) / n;
  return est;
}

GridSet support_of_field(const Raster& u, double tol) {
  GridSet raw(u.grid);
  bool any = false;
  for (size_t i = 0; i < u.values.size(); ++i) {
    raw.mask[i] = std::abs(u.values[i]) > tol ? 1 : 0;
    any = any || raw.mask[i];
  }
  if (!any) return raw;  // empty support stays empty
  return dilate(raw, u.grid.spacing);
}

GridSet set_union(const GridSet& a, const GridSet& b) {
  require_same_grid(a.grid, b.grid, "set_union");
  GridSet out(a.grid);
  for (size_t i = 0; i < a.mask.size(); ++i) out.mask[i] = (a.mask[i] || b.mask[i]) ? 1 : 0;
  return out;
}

GridSet set_intersection(const GridSet& a, const GridSet& b) {
  require_same_grid(a.grid, b.grid, "set_intersection");
  GridSet out(a.grid);
  for (size_t i = 0; i < a.mask.size(); ++i) out.mask[i] = (a.mask[i] && b.mask[i]) ? 1 : 0;
  return out;
}

GridSet set_difference(const GridSet& a, const GridSet& b) {
  require_same_grid(a.grid, b.grid, "set_difference");
  GridSet out(a.grid);
  for (size_t i = 0; i < a.mask.size(); ++i) out.mask[i] = (a.mask[i] && !b.mask[i]) ? 1 : 0;
  return out;
}

GridSet complement(const GridSet& a) {
  GridSet out(a.grid);
  for (size_t i = 0; i < a.mask.size(); ++i) out.mask[i] = a.mask[i] ? 0 : 1;
  return out;
}

bool subset_of(const GridSet& a, const GridSet& b) {
  require_same_grid(a.grid, b.grid, "subset_of");
  for (size_t i = 0; i < a.mask.size(); ++i)
    if (a.mask[i] && !b.mask[i]) return false;
  return true;
}

}  // namespace fnl
