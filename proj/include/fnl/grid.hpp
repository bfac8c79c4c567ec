#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fnl/errors.hpp"

namespace fnl {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Vec2 a) { return std::hypot(a[0], a[1]); }

/// Uniform isotropic cell grid in 1 or 2 dimensions.
///
/// Cells are addressed row-major (ix + extents[0]*iy); a cell's sample point
/// is its center origin + (i + 1/2) * spacing.  1D grids use extents[1] = 1.
struct Grid {
  int dim = 1;
  Vec2 origin{0.0, 0.0};
  double spacing = 1.0;
  std::array<int, 2> extents{2, 1};

  static Grid line(double lo, double hi, int cells) {
    if (cells < 2 || !(hi > lo)) throw PreconditionError("grid: need hi > lo and cells >= 2");
    Grid g;
    g.dim = 1;
    g.origin = {lo, 0.0};
    g.spacing = (hi - lo) / cells;
    g.extents = {cells, 1};
    return g;
  }

  // Square box [lo,hi]^2 with the same cell count per axis.
  static Grid box(double lo, double hi, int cells) {
    if (cells < 2 || !(hi > lo)) throw PreconditionError("grid: need hi > lo and cells >= 2");
    Grid g;
    g.dim = 2;
    g.origin = {lo, lo};
    g.spacing = (hi - lo) / cells;
    g.extents = {cells, cells};
    return g;
  }

  int cell_count() const { return extents[0] * extents[1]; }
  double cell_volume() const { return dim == 1 ? spacing : spacing * spacing; }

  int index(int ix, int iy) const { return ix + extents[0] * iy; }

  Vec2 center(int ix, int iy) const {
    return {origin[0] + (ix + 0.5) * spacing,
            dim == 1 ? 0.0 : origin[1] + (iy + 0.5) * spacing};
  }
  Vec2 center(int idx) const { return center(idx % extents[0], idx / extents[0]); }

  // Cell whose closed square contains p (clamped to the grid).
  int locate(Vec2 p) const {
    int ix = static_cast<int>(std::floor((p[0] - origin[0]) / spacing));
    int iy = dim == 1 ? 0 : static_cast<int>(std::floor((p[1] - origin[1]) / spacing));
    ix = std::max(0, std::min(extents[0] - 1, ix));
    iy = std::max(0, std::min(extents[1] - 1, iy));
    return index(ix, iy);
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && origin == o.origin && spacing == o.spacing && extents == o.extents;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw GridMismatchError(std::string(what) + ": grids differ");
}

/// Closed subset of a grid, stored as a cell mask.
///
/// The optional `level` companion is a sub-cell level function: when present
/// it has one value per cell and satisfies (level[i] <= 0) == mask[i], i.e.
/// non-positive exactly on the set.
struct GridSet {
  Grid grid;
  std::vector<std::uint8_t> mask;
  std::vector<double> level;  // empty when absent

  GridSet() = default;
  explicit GridSet(const Grid& g) : grid(g), mask(g.cell_count(), 0) {}

  bool has_level() const { return !level.empty(); }

  int count() const {
    int n = 0;
    for (auto m : mask) n += (m != 0);
    return n;
  }
  bool empty() const {
    for (auto m : mask)
      if (m) return false;
    return true;
  }
};

/// Scalar raster: one double per cell of a grid.
struct Raster {
  Grid grid;
  std::vector<double> values;

  Raster() = default;
  explicit Raster(const Grid& g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}
  Raster(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}
};

// Pointwise construction helpers (used by tests, presets and the CLI).
inline GridSet rasterize(const Grid& g, const std::function<bool(Vec2)>& inside) {
  GridSet s(g);
  for (int i = 0; i < g.cell_count(); ++i) s.mask[i] = inside(g.center(i)) ? 1 : 0;
  return s;
}

inline Raster sample(const Grid& g, const std::function<double(Vec2)>& f) {
  Raster r(g);
  for (int i = 0; i < g.cell_count(); ++i) r.values[i] = f(g.center(i));
  return r;
}

inline GridSet ball_set(const Grid& g, Vec2 c, double radius) {
  const double r2 = radius * radius * (1.0 + 1e-12);
  return rasterize(g, [&](Vec2 p) {
    Vec2 d = p - c;
    return dot(d, d) <= r2;
  });
}

}  // namespace fnl
