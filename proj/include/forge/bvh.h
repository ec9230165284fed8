#pragma once

#include "forge/common.h"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace forge {

using Triangle = std::array<std::uint32_t, 3>;

struct RayHit {
  double t = kInf;
  std::uint32_t triangle = 0;
};

/// Moller-Trumbore ray/triangle test. Returns the ray parameter of the hit
/// (dir need not be normalized) or nullopt.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c);

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Binned-SAH bounding volume hierarchy over an indexed triangle mesh.
///
/// The hierarchy keeps copies of the vertex positions it needs, so it stays
/// valid independently of the mesh containers it was built from. All queries
/// are const and safe to call concurrently.
class TriangleBvh {
 public:
  TriangleBvh() = default;
  TriangleBvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

  /// Nearest hit with t in (t_min, t_max).
  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                  double t_max) const;

  /// True if any triangle is hit with t in (t_min, t_max).
  bool occluded(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;

  /// True if some triangle has a point within `radius` of p.
  bool any_within(const Vec3& p, double radius) const;

  /// Calls visit(triangle index) for every triangle whose bounds overlap box.
  void for_each_overlapping(const Aabb& box,
                            const std::function<void(std::uint32_t)>& visit) const;

  std::size_t triangle_count() const { return tri_vertices_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Aabb bounds;
    // Leaf when count > 0: primitives [first, first + count) of order_.
    // Inner node: children are nodes first and first + 1.
    std::uint32_t first = 0;
    std::uint32_t count = 0;
  };

  void build(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end,
             const std::vector<Aabb>& boxes, const std::vector<Vec3>& centers, int depth);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<std::array<Vec3, 3>> tri_vertices_;
};

}  // namespace forge
