#pragma once

#include "forge/bvh.h"
#include "forge/common.h"

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace forge {

/// Id reserved for unlabeled structure (walls, floors, ceilings).
inline constexpr InstanceId kStructureId = 0;

/// The recommended closed category vocabulary.
inline constexpr std::array<std::string_view, 6> kCategories = {"chair", "bed",   "toilet",
                                                                 "couch", "plant", "tv"};

struct ObjectInstance {
  InstanceId id = 0;
  std::string category;
  /// Area-weighted mean of the instance's triangle centroids.
  Vec3 centroid = Vec3::Zero();
  Aabb aabb;
};

/// Immutable, validated triangle mesh with per-triangle instance labels.
///
/// Derived data (instance centroids and boxes, scene bounds, the ray-casting
/// hierarchy) is always recomputed from geometry at construction.
class Scene {
 public:
  struct Category {
    InstanceId id;
    std::string name;
  };

  /// Validates the arrays and derives all per-instance data. Throws
  /// ValidationError on dangling indices, unknown labels, duplicate or
  /// unlabeled instance entries, and non-finite coordinates.
  Scene(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
        std::vector<InstanceId> triangle_instance, std::vector<Category> categories);

  Scene() : Scene({}, {}, {}, {}) {}

  std::span<const Vec3> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const InstanceId> triangle_instance() const { return triangle_instance_; }
  /// Sorted by id.
  std::span<const ObjectInstance> instances() const { return instances_; }
  const Aabb& bounds() const { return bounds_; }
  const TriangleBvh& bvh() const { return *bvh_; }

  const ObjectInstance* find(InstanceId id) const;
  const ObjectInstance& instance(InstanceId id) const;
  /// Indices of the triangles labeled with `id`.
  std::vector<std::uint32_t> triangles_of(InstanceId id) const;

  std::array<Vec3, 3> triangle_vertices(std::uint32_t t) const {
    const Triangle& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
  }

  /// Geometric equality: arrays and instance table (derived data follows).
  bool operator==(const Scene& other) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<InstanceId> triangle_instance_;
  std::vector<ObjectInstance> instances_;
  Aabb bounds_;
  std::shared_ptr<const TriangleBvh> bvh_;
};

/// Reads a scene file (see docs/formats.md). Throws ParseError or
/// ValidationError.
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(std::string_view text);

/// Writes the canonical text form: instance table sorted by id and doubles in
/// shortest round-trip notation, so save -> load -> save is byte-stable.
void save_scene(const Scene& scene, const std::filesystem::path& path);
std::string format_scene(const Scene& scene);

struct ProceduralSpec {
  int rooms = 4;
  int objects_per_room = 2;
  std::uint64_t seed = 0;
};

/// Layout constants of generated scenes.
struct ProceduralLayout {
  static constexpr double kWallThickness = 0.1;
  static constexpr double kCeilingHeight = 2.6;
  static constexpr double kDoorWidth = 0.9;
  static constexpr double kMinRoomSize = 3.5;
  static constexpr double kMaxRoomSize = 5.0;
  static constexpr double kWallMargin = 0.45;
  static constexpr double kObjectGap = 0.4;
  static constexpr double kDoorClearance = 1.0;
  static constexpr int kPlacementRetries = 200;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned rooms on a grid, chained by door gaps in boustrophedon order,
/// with a floor at y = 0 and furniture-proxy boxes. Throws InfeasibleError
/// when objects cannot be placed without overlap.
Scene generate_procedural_scene(const ProceduralSpec& spec);

/// Appends an axis-aligned box (12 triangles) labeled `id` to the arrays.
void append_box(const Aabb& box, InstanceId id, std::vector<Vec3>& vertices,
                std::vector<Triangle>& triangles, std::vector<InstanceId>& labels);

}  // namespace forge
