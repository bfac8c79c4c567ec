#pragma once

#include <utility>
#include <vector>

#include "fnl/grid.hpp"

namespace fnl {

/// Exact Euclidean distance from every cell center to the nearest cell center
/// of `a` (0 on `a` itself).  Throws EmptySetError when `a` is empty.
Raster distance_field(const GridSet& a);

/// Signed variant: negative inside `a` (distance to the complement), positive
/// outside (distance to `a`).  Never exactly zero because distances are taken
/// center-to-center.
Raster signed_distance_field(const GridSet& a);

/// Closed r-neighbourhood on the grid: cells whose center lies within r of a
/// cell center of `a`.  Ties at exactly r are included.  dilate(a, 0) == a.
GridSet dilate(const GridSet& a, double r);

/// Morphological erosion via the complement: erode(a, r) = ~dilate(~a, r).
/// Cells outside the grid count as part of `a` (sets are expected to stay
/// clear of the border).
GridSet erode(const GridSet& a, double r);

/// True when `a` is an r-neighbourhood up to `tol`: the opening
/// dilate(erode(a,r),r) is within Hausdorff distance tol of `a`.  Empty
/// erosion (set thinner than r everywhere) gives false.
bool is_tubular(const GridSet& a, double r, double tol);

/// Hausdorff distance between two nonempty sets on the same grid.
double hausdorff_distance(const GridSet& a, const GridSet& b);

/// Lebesgue measure of the cell union: count * spacing^dim.
double measure(const GridSet& a);

/// Measure of the symmetric difference.
double sym_diff_measure(const GridSet& a, const GridSet& b);

/// Largest center-to-center distance within `a` (0 for a single cell).
double set_diameter(const GridSet& a);

struct MinkowskiEstimate {
  double content = 0;  // fitted q(0), the outer Minkowski content estimate
  double slope = 0;    // fitted dq/dr
  std::vector<std::pair<double, double>> table;  // (r, q(r)) rows
};

/// Outer Minkowski content via the dilation quotient q(r) = |B(a,r) \ a| / r
/// and a least-squares line q(r) = content + slope * r over the given radii.
/// Every radius must exceed 2 * spacing.
MinkowskiEstimate minkowski_content(const GridSet& a, std::vector<double> radii);

inline constexpr double kSupportTolerance = 1e-12;

/// Closed support of a sampled field: cells with |u| > tol, dilated by one
/// cell (axis neighbours) to mimic taking the closure.
GridSet support_of_field(const Raster& u, double tol = kSupportTolerance);

// Mask algebra on a shared grid.
GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_intersection(const GridSet& a, const GridSet& b);
GridSet set_difference(const GridSet& a, const GridSet& b);
GridSet complement(const GridSet& a);
bool subset_of(const GridSet& a, const GridSet& b);  // a ⊆ b on masks

namespace detail {

/// Exact squared-distance transform of an arbitrary-rank grid (Felzenszwalb &
/// Huttenlocher lower-envelope scan per axis).  `f` holds 0 on seeds and
/// kInfDist elsewhere; each axis can have its own sample spacing.
inline constexpr double kInfDist = 1e30;
void edt_squared(std::vector<double>& f, const std::vector<int>& extents,
                 const std::vector<double>& spacing);

/// Squared distances from cell centers to `mask` cells on a 2D/1D grid.
std::vector<double> edt_squared_of_mask(const Grid& g, const std::vector<std::uint8_t>& mask);

}  // namespace detail

}  // namespace fnl
