#pragma once

#include "forge/scene.h"
#include "forge/rng.h"

#include <string>
#include <vector>

namespace forge::test {

struct MeshBuilder {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<InstanceId> labels;
  std::vector<Scene::Category> categories;

  MeshBuilder& box(const Vec3& lo, const Vec3& hi, InstanceId id = kStructureId,
                   const std::string& category = "chair") {
    Aabb b;
    b.extend(lo);
    b.extend(hi);
    append_box(b, id, vertices, triangles, labels);
    if (id != kStructureId) {
      bool known = false;
      for (const auto& c : categories) known = known || c.id == id;
      if (!known) categories.push_back({id, category});
    }
    return *this;
  }

  MeshBuilder& triangle(const Vec3& a, const Vec3& b, const Vec3& c, InstanceId id = kStructureId) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), {a, b, c});
    triangles.push_back({base, base + 1, base + 2});
    labels.push_back(id);
    return *this;
  }

  Scene build() const { return Scene(vertices, triangles, labels, categories); }
};

/// Closed rectangular room [0, w] x [0, d] with a floor slab at y = 0 and
/// 2.6 m walls.
inline MeshBuilder room(double w, double d) {
  MeshBuilder m;
  m.box({-0.1, -0.1, -0.1}, {w + 0.1, 0.0, d + 0.1});
  m.box({-0.1, 0.0, -0.1}, {0.0, 2.6, d + 0.1});
  m.box({w, 0.0, -0.1}, {w + 0.1, 2.6, d + 0.1});
  m.box({0.0, 0.0, -0.1}, {w, 2.6, 0.0});
  m.box({0.0, 0.0, d}, {w, 2.6, d + 0.1});
  return m;
}

/// Perfect maze of n x n cells (recursive backtracker) with corridor width
/// `cell` and 0.1 m walls, inside a closed room.
inline MeshBuilder maze(std::uint64_t seed, int n, double cell) {
  const double t = 0.1;
  const double size = n * cell;
  MeshBuilder m = room(size, size);
  // open[i][dir]: passage from cell i toward +x (0) or +z (1).
  std::vector<std::array<bool, 2>> open(n * n, {false, false});
  std::vector<bool> seen(n * n, false);
  Rng rng(seed);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int c = stack.back();
    const int cx = c % n;
    const int cz = c / n;
    std::vector<int> next;
    if (cx + 1 < n && !seen[c + 1]) next.push_back(c + 1);
    if (cx > 0 && !seen[c - 1]) next.push_back(c - 1);
    if (cz + 1 < n && !seen[c + n]) next.push_back(c + n);
    if (cz > 0 && !seen[c - n]) next.push_back(c - n);
    if (next.empty()) {
      stack.pop_back();
      continue;
    }
    const int k = next[rng.below(next.size())];
    if (k == c + 1) open[c][0] = true;
    if (k == c - 1) open[k][0] = true;
    if (k == c + n) open[c][1] = true;
    if (k == c - n) open[k][1] = true;
    seen[k] = true;
    stack.push_back(k);
  }
  for (int z = 0; z < n; ++z) {
    for (int x = 0; x < n; ++x) {
      const int c = z * n + x;
      const double x1 = (x + 1) * cell;
      const double z1 = (z + 1) * cell;
      if (x + 1 < n && !open[c][0]) m.box({x1 - t / 2, 0.0, z * cell}, {x1 + t / 2, 2.6, z1});
      if (z + 1 < n && !open[c][1]) m.box({x * cell, 0.0, z1 - t / 2}, {x1, 2.6, z1 + t / 2});
    }
  }
  return m;
}

/// The seeded 4-room procedural scene used across suites.
inline const Scene& four_rooms() {
  static const Scene scene = generate_procedural_scene({4, 2, 7});
  return scene;
}

}  // namespace forge::test

#include "forge/coverage.h"
#include "forge/episodes.h"

namespace forge::test {

/// Two 3 x 3 m rooms joined by a 1 m doorway, a chair in each room.
inline Scene two_rooms() {
  MeshBuilder m = room(6.0, 3.0);
  m.box({2.95, 0.0, 0.0}, {3.05, 2.6, 2.0});
  m.box({4.3, 0.0, 0.4}, {4.8, 0.9, 0.9}, 1, "chair");
  m.box({1.0, 0.0, 0.5}, {1.9, 0.85, 2.4}, 2, "couch");
  return m.build();
}

/// Stand-in goals: `count` cameras per instance looking at its centroid.
/// Episode construction only carries goals through, so no scoring needed.
inline std::vector<ImageGoal> stub_goals(const Scene& scene, std::size_t count) {
  std::vector<ImageGoal> goals;
  for (const auto& o : scene.instances()) {
    for (std::size_t k = 0; k < count; ++k) {
      ImageGoal g;
      g.object_id = o.id;
      g.category = o.category;
      g.camera = PinholeCamera::looking_at(o.centroid + Vec3(1.0, 0.5, 0.1 * k), o.centroid,
                                           deg_to_rad(90), kGoalImageSize, kGoalImageSize);
      g.frame_coverage = 0.1;
      g.object_coverage = 0.8;
      g.osa = 1.0;
      goals.push_back(g);
    }
  }
  return goals;
}

}  // namespace forge::test
