#include "forge/rng.h"
#include "forge/scene.h"

#include <algorithm>

namespace forge {

namespace {

struct CategoryShape {
  std::string_view name;
  Vec3 size;         // x, y, z extents before scaling
  double elevation;  // height of the box bottom above the floor
};

const std::array<CategoryShape, 6> kShapes = {{
    {"chair", {0.5, 0.9, 0.5}, 0.0},
    {"bed", {1.5, 0.55, 2.0}, 0.0},
    {"toilet", {0.45, 0.8, 0.7}, 0.0},
    {"couch", {1.9, 0.85, 0.9}, 0.0},
    {"plant", {0.45, 1.1, 0.45}, 0.0},
    {"tv", {1.1, 0.65, 0.15}, 0.75},
}};

struct Cell {
  int row = 0;
  int col = 0;
};

struct Door {
  Vec2 center;  // (x, z)
};

}  // namespace

Scene generate_procedural_scene(const ProceduralSpec& spec) {
  using L = ProceduralLayout;
  if (spec.rooms < 1 || spec.objects_per_room < 1)
    throw InfeasibleError("procedural scene: room and object counts must be >= 1");

  Rng rng(derive_seed(spec.seed, 0x5ce4e));
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.rooms))));
  const int rows = (spec.rooms + cols - 1) / cols;

  std::vector<double> xs{0.0};
  for (int c = 0; c < cols; ++c) xs.push_back(xs.back() + rng.uniform(L::kMinRoomSize, L::kMaxRoomSize));
  std::vector<double> zs{0.0};
  for (int r = 0; r < rows; ++r) zs.push_back(zs.back() + rng.uniform(L::kMinRoomSize, L::kMaxRoomSize));

  // Rooms are laid out in boustrophedon order so consecutive rooms are
  // adjacent; each consecutive pair shares a door.
  std::vector<Cell> rooms(spec.rooms);
  std::vector<std::vector<int>> occupant(rows, std::vector<int>(cols, -1));
  for (int k = 0; k < spec.rooms; ++k) {
    const int r = k / cols;
    const int c = (r % 2 == 0) ? k % cols : cols - 1 - k % cols;
    rooms[k] = {r, c};
    occupant[r][c] = k;
  }
  auto linked = [&](int a, int b) { return a >= 0 && b >= 0 && std::abs(a - b) == 1; };

  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<InstanceId> labels;
  const double t = L::kWallThickness;
  const double h = L::kCeilingHeight;

  Aabb floor{{xs.front() - t / 2, -0.1, zs.front() - t / 2}, {xs.back() + t / 2, 0.0, zs.back() + t / 2}};
  append_box(floor, kStructureId, vertices, triangles, labels);
  Aabb ceiling = floor;
  ceiling.lo.y() = h;
  ceiling.hi.y() = h + 0.1;
  append_box(ceiling, kStructureId, vertices, triangles, labels);

  std::vector<std::vector<Door>> doors(spec.rooms);

  // A wall along one axis from `from` to `to` at fixed coordinate `at`;
  // `along_x` selects its orientation. An optional door splits it in two.
  auto emit_wall = [&](bool along_x, double at, double from, double to, bool door, int room_a,
                       int room_b) {
    std::vector<std::pair<double, double>> spans;
    if (door) {
      const double d0 = rng.uniform(from + 0.5, to - 0.5 - L::kDoorWidth);
      spans.push_back({from - t / 2, d0});
      spans.push_back({d0 + L::kDoorWidth, to + t / 2});
      const double mid = d0 + L::kDoorWidth / 2;
      const Vec2 center = along_x ? Vec2(mid, at) : Vec2(at, mid);
      doors[room_a].push_back({center});
      doors[room_b].push_back({center});
    } else {
      spans.push_back({from - t / 2, to + t / 2});
    }
    for (const auto& [s0, s1] : spans) {
      Aabb box;
      if (along_x) {
        box.lo = {s0, 0.0, at - t / 2};
        box.hi = {s1, h, at + t / 2};
      } else {
        box.lo = {at - t / 2, 0.0, s0};
        box.hi = {at + t / 2, h, s1};
      }
      append_box(box, kStructureId, vertices, triangles, labels);
    }
  };

  // Walls at constant x between horizontally adjacent cells.
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i <= cols; ++i) {
      const int left = i > 0 ? occupant[r][i - 1] : -1;
      const int right = i < cols ? occupant[r][i] : -1;
      if (left < 0 && right < 0) continue;
      emit_wall(false, xs[i], zs[r], zs[r + 1], linked(left, right), left, right);
    }
  }
  // Walls at constant z between vertically adjacent cells.
  for (int c = 0; c < cols; ++c) {
    for (int j = 0; j <= rows; ++j) {
      const int below = j > 0 ? occupant[j - 1][c] : -1;
      const int above = j < rows ? occupant[j][c] : -1;
      if (below < 0 && above < 0) continue;
      emit_wall(true, zs[j], xs[c], xs[c + 1], linked(below, above), below, above);
    }
  }

  std::vector<Scene::Category> categories;
  InstanceId next_id = 1;
  for (int k = 0; k < spec.rooms; ++k) {
    const Cell cell = rooms[k];
    const double x0 = xs[cell.col] + t / 2 + L::kWallMargin;
    const double x1 = xs[cell.col + 1] - t / 2 - L::kWallMargin;
    const double z0 = zs[cell.row] + t / 2 + L::kWallMargin;
    const double z1 = zs[cell.row + 1] - t / 2 - L::kWallMargin;
    // A large first object can leave no room for the rest, so a room that
    // cannot be furnished is redrawn from scratch.
    struct Placement {
      Aabb box;
      std::string_view category;
    };
    std::vector<Placement> placed;
    bool furnished = false;
    for (int round = 0; round < L::kPlacementRetries && !furnished; ++round) {
      placed.clear();
      furnished = true;
      for (int o = 0; o < spec.objects_per_room && furnished; ++o) {
        bool ok = false;
        for (int attempt = 0; attempt < L::kPlacementRetries && !ok; ++attempt) {
          const CategoryShape& shape = kShapes[rng.below(kShapes.size())];
          const double scale = rng.uniform(0.85, 1.15);
          Vec3 size = shape.size * scale;
          if (rng.uniform() < 0.5) std::swap(size.x(), size.z());
          if (x1 - x0 < size.x() || z1 - z0 < size.z()) continue;
          const double bx = rng.uniform(x0, x1 - size.x());
          const double bz = rng.uniform(z0, z1 - size.z());
          Aabb box{{bx, shape.elevation, bz},
                   {bx + size.x(), shape.elevation + size.y(), bz + size.z()}};

          Aabb padded = box;
          padded.lo -= Vec3::Constant(L::kObjectGap);
          padded.hi += Vec3::Constant(L::kObjectGap);
          if (std::any_of(placed.begin(), placed.end(),
                          [&](const Placement& other) { return other.box.overlaps(padded); }))
            continue;
          if (std::any_of(doors[k].begin(), doors[k].end(), [&](const Door& d) {
                return footprint_distance(box, d.center) < L::kDoorClearance;
              }))
            continue;
          placed.push_back({box, shape.name});
          ok = true;
        }
        furnished = ok;
      }
    }
    if (!furnished)
      throw InfeasibleError("procedural scene: could not furnish room " + std::to_string(k) +
                            " with " + std::to_string(spec.objects_per_room) + " objects");
    for (const auto& p : placed) {
      append_box(p.box, next_id, vertices, triangles, labels);
      categories.push_back({next_id, std::string(p.category)});
      ++next_id;
    }
  }

  return Scene(std::move(vertices), std::move(triangles), std::move(labels),
               std::move(categories));
}

}  // namespace forge
