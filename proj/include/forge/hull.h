#pragma once

#include "forge/common.h"

#include <array>
#include <span>
#include <vector>

namespace forge {

struct ConvexHull {
  /// Affine dimension of the input: 0 (single point or empty), 1, 2 or 3.
  int dimension = 0;
  /// Indices into the input of the hull's extreme points.
  std::vector<std::size_t> vertices;
  /// Outward-wound facets (dimension 3 only).
  std::vector<std::array<std::size_t, 3>> faces;
  /// Surface area. Planar inputs count both sides of their 2D hull.
  double area = 0.0;
};

/// 3D convex hull by quickhull. Degenerate inputs: fewer than three points or
/// collinear points give area 0; coplanar points give twice the area of their
/// 2D hull in the best-fit plane.
ConvexHull convex_hull(std::span<const Vec3> points);

/// Surface area of the convex hull of `points` (m^2 for metric input).
double hull_area(std::span<const Vec3> points);

/// Area of the 2D convex hull (Andrew's monotone chain).
double polygon_hull_area(std::span<const Vec2> points, std::vector<std::size_t>* hull = nullptr);

}  // namespace forge
