#include "forge/bvh.h"

#include <algorithm>

namespace forge {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr int kBins = 12;
// Traversal stacks hold at most depth + 1 entries.
constexpr int kMaxDepth = 60;

// Slab test; returns entry distance or nullopt.
std::optional<double> ray_box(const Aabb& box, const Vec3& origin, const Vec3& inv_dir,
                              double t_min, double t_max) {
  for (int axis = 0; axis < 3; ++axis) {
    double t0 = (box.lo[axis] - origin[axis]) * inv_dir[axis];
    double t1 = (box.hi[axis] - origin[axis]) * inv_dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    // NaN (0 * inf) leaves the interval untouched.
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_min > t_max) return std::nullopt;
  }
  return t_min;
}

double box_distance_sq(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.hi);
  return d.squaredNorm();
}

}  // namespace

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(q) * inv_det;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles) {
  const auto n = static_cast<std::uint32_t>(triangles.size());
  tri_vertices_.reserve(n);
  std::vector<Aabb> boxes(n);
  std::vector<Vec3> centers(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& t = triangles[i];
    tri_vertices_.push_back({vertices[t[0]], vertices[t[1]], vertices[t[2]]});
    for (const Vec3& v : tri_vertices_.back()) boxes[i].extend(v);
    centers[i] = boxes[i].center();
  }
  order_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) order_[i] = i;
  if (n == 0) return;
  nodes_.reserve(2 * n);
  nodes_.emplace_back();
  build(0, 0, n, boxes, centers, 0);
}

void TriangleBvh::build(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end,
                        const std::vector<Aabb>& boxes, const std::vector<Vec3>& centers, int depth) {
  Aabb bounds;
  Aabb centroid_bounds;
  for (std::uint32_t i = begin; i < end; ++i) {
    bounds.extend(boxes[order_[i]]);
    centroid_bounds.extend(centers[order_[i]]);
  }
  nodes_[node_index].bounds = bounds;

  const std::uint32_t count = end - begin;
  auto make_leaf = [&] {
    nodes_[node_index].first = begin;
    nodes_[node_index].count = count;
  };
  if (count <= kLeafSize || depth >= kMaxDepth) return make_leaf();

  const Vec3 extent = centroid_bounds.extent();
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  if (extent[axis] <= 0.0) return make_leaf();

  struct Bin {
    Aabb box;
    std::uint32_t count = 0;
  };
  std::array<Bin, kBins> bins{};
  const double scale = kBins / extent[axis];
  auto bin_of = [&](std::uint32_t prim) {
    const int b = static_cast<int>((centers[prim][axis] - centroid_bounds.lo[axis]) * scale);
    return std::clamp(b, 0, kBins - 1);
  };
  for (std::uint32_t i = begin; i < end; ++i) {
    Bin& bin = bins[bin_of(order_[i])];
    bin.box.extend(boxes[order_[i]]);
    ++bin.count;
  }
  std::array<double, kBins - 1> cost{};
  Aabb left;
  std::uint32_t left_count = 0;
  for (int i = 0; i < kBins - 1; ++i) {
    left.extend(bins[i].box);
    left_count += bins[i].count;
    cost[i] = left_count * left.surface_area();
  }
  Aabb right;
  std::uint32_t right_count = 0;
  for (int i = kBins - 1; i > 0; --i) {
    right.extend(bins[i].box);
    right_count += bins[i].count;
    cost[i - 1] += right_count * right.surface_area();
  }
  const int split = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());

  auto mid_it = std::partition(order_.begin() + begin, order_.begin() + end,
                               [&](std::uint32_t prim) { return bin_of(prim) <= split; });
  auto mid = static_cast<std::uint32_t>(mid_it - order_.begin());
  if (mid == begin || mid == end) {
    mid = begin + count / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return centers[a][axis] < centers[b][axis];
                     });
  }

  const auto left_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node_index].first = left_index;
  nodes_[node_index].count = 0;
  build(left_index, begin, mid, boxes, centers, depth + 1);
  build(left_index + 1, mid, end, boxes, centers, depth + 1);
}

std::optional<RayHit> TriangleBvh::intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                             double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_dir = dir.cwiseInverse();
  RayHit best;
  best.t = t_max;
  bool found = false;
  std::array<std::uint32_t, kMaxDepth + 2> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.bounds, origin, inv_dir, t_min, best.t)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = tri_vertices_[order_[i]];
        const auto t = intersect_triangle(origin, dir, tri[0], tri[1], tri[2]);
        if (t && *t > t_min && *t < best.t) {
          best.t = *t;
          best.triangle = order_[i];
          found = true;
        }
      }
      continue;
    }
    // Visit the nearer child first.
    std::uint32_t near_child = node.first;
    std::uint32_t far_child = node.first + 1;
    const auto t_left = ray_box(nodes_[near_child].bounds, origin, inv_dir, t_min, best.t);
    const auto t_right = ray_box(nodes_[far_child].bounds, origin, inv_dir, t_min, best.t);
    if (t_left && t_right && *t_right < *t_left) std::swap(near_child, far_child);
    stack[top++] = far_child;
    stack[top++] = near_child;
  }
  if (!found) return std::nullopt;
  return best;
}

bool TriangleBvh::occluded(const Vec3& origin, const Vec3& dir, double t_min,
                           double t_max) const {
  if (nodes_.empty()) return false;
  const Vec3 inv_dir = dir.cwiseInverse();
  std::array<std::uint32_t, kMaxDepth + 2> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.bounds, origin, inv_dir, t_min, t_max)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = tri_vertices_[order_[i]];
        const auto t = intersect_triangle(origin, dir, tri[0], tri[1], tri[2]);
        if (t && *t > t_min && *t < t_max) return true;
      }
      continue;
    }
    stack[top++] = node.first;
    stack[top++] = node.first + 1;
  }
  return false;
}

bool TriangleBvh::any_within(const Vec3& p, double radius) const {
  if (nodes_.empty()) return false;
  const double r2 = radius * radius;
  std::array<std::uint32_t, kMaxDepth + 2> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.bounds, p) > r2) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = tri_vertices_[order_[i]];
        if ((closest_point_on_triangle(p, tri[0], tri[1], tri[2]) - p).squaredNorm() <= r2)
          return true;
      }
      continue;
    }
    stack[top++] = node.first;
    stack[top++] = node.first + 1;
  }
  return false;
}

void TriangleBvh::for_each_overlapping(const Aabb& box,
                                       const std::function<void(std::uint32_t)>& visit) const {
  if (nodes_.empty()) return;
  std::array<std::uint32_t, kMaxDepth + 2> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.bounds.overlaps(box)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        Aabb tri_box;
        for (const Vec3& v : tri_vertices_[order_[i]]) tri_box.extend(v);
        if (tri_box.overlaps(box)) visit(order_[i]);
      }
      continue;
    }
    stack[top++] = node.first;
    stack[top++] = node.first + 1;
  }
}

}  // namespace forge
