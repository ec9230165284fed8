#pragma once

#include "forge/common.h"
#include "forge/scene.h"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace forge {

/// Rigid cylinder agent.
struct AgentBody {
  double radius = 0.17;
  double height = 1.41;
  double sensor_height = 1.31;

  void validate() const;
};

struct OccupancyConfig {
  double cell_size = 0.05;
  /// Nominal floor level; support is searched within +-probe_range of it.
  double ground_y = 0.0;
  double probe_range = 0.25;
  /// Geometry lower than this above the local floor is not an obstacle.
  double step_height = 0.05;
};

/// 2D navigability grid over the scene footprint in (x, z).
///
/// Cell (ix, iz) spans [origin + (ix, iz) * cell_size, + cell_size). A cell
/// is free iff the body cylinder centered on it has floor support and no
/// geometry between step height and body height lies within its radius.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec2 origin, double cell_size, int nx, int nz);

  double cell_size() const { return cell_size_; }
  const Vec2& origin() const { return origin_; }
  int nx() const { return nx_; }
  int nz() const { return nz_; }
  std::size_t cell_count() const { return free_.size(); }

  std::size_t index(int ix, int iz) const { return static_cast<std::size_t>(iz) * nx_ + ix; }
  int ix_of(std::size_t i) const { return static_cast<int>(i % nx_); }
  int iz_of(std::size_t i) const { return static_cast<int>(i / nx_); }
  bool in_bounds(int ix, int iz) const { return ix >= 0 && iz >= 0 && ix < nx_ && iz < nz_; }

  /// Cell containing p, if inside the grid.
  std::optional<std::size_t> cell_of(const Vec2& p) const;
  Vec2 center(std::size_t i) const;

  bool is_free(std::size_t i) const { return free_[i] != 0; }
  bool is_free(const Vec2& p) const {
    const auto c = cell_of(p);
    return c && is_free(*c);
  }
  /// Floor height of a supported cell; NaN otherwise.
  double floor_y(std::size_t i) const { return floor_y_[i]; }

  void set(std::size_t i, bool free, double floor_y) {
    free_[i] = free ? 1 : 0;
    floor_y_[i] = floor_y;
  }

  std::size_t free_count() const;
  std::vector<std::size_t> free_cells() const;

  /// Nearest free cell whose center is within max_distance of p.
  std::optional<std::size_t> snap(const Vec2& p, double max_distance) const;

 private:
  Vec2 origin_ = Vec2::Zero();
  double cell_size_ = 0.05;
  int nx_ = 0;
  int nz_ = 0;
  std::vector<std::uint8_t> free_;
  std::vector<double> floor_y_;
};

/// Throws ValidationError for a cell size outside (0, radius] and
/// Error("degenerate scene") when no cell has floor support.
OccupancyGrid build_occupancy(const Scene& scene, const AgentBody& body,
                              const OccupancyConfig& config = {});

/// Binary grid file: see docs/formats.md.
void save_grid(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid load_grid(const std::filesystem::path& path);

inline constexpr double kSnapDistance = 0.2;

/// Whether the straight segment from a to b stays on free cells, sampled
/// every quarter cell.
bool segment_free(const OccupancyGrid& grid, const Vec2& a, const Vec2& b);

/// Shortest 8-connected path length between the cells containing the points
/// (snapped to the nearest free cell within kSnapDistance). Diagonal moves
/// need both adjacent orthogonal cells free. nullopt when unreachable.
std::optional<double> geodesic_distance(const OccupancyGrid& grid, const Vec2& from,
                                        const Vec2& to);

/// Multi-source shortest path distances over free cells.
struct DistanceField {
  std::vector<double> distance;  // +inf where unreachable
  /// Index into the source list of the nearest source; -1 when unreachable.
  std::vector<int> source;
};

/// Sources are snapped like geodesic_distance; unsnappable sources are
/// ignored. Ties between sources resolve to the lower source index.
DistanceField distance_field(const OccupancyGrid& grid, std::span<const Vec2> sources);

/// n points uniform over free cells, jittered within the cell.
std::vector<Vec2> sample_standable(const OccupancyGrid& grid, std::uint64_t seed, std::size_t n);

struct Viewpoint {
  /// On the floor of its cell.
  Vec3 position = Vec3::Zero();
  InstanceId object_id = 0;
};

struct ViewpointConfig {
  /// Lattice spacing; non-positive means radius / 2.
  double spacing = 0.0;
  double max_distance = 1.0;
  std::size_t surface_samples = 64;
};

/// Deterministic stratified area-weighted samples on an instance's surface.
std::vector<Vec3> surface_samples(const Scene& scene, InstanceId id, std::size_t count);

/// Lattice points within max_distance of the object's box footprint, on free
/// cells, from whose sensor point some surface sample is in line of sight.
std::vector<Viewpoint> compute_viewpoints(const Scene& scene, const OccupancyGrid& grid,
                                          const ObjectInstance& object, const AgentBody& body,
                                          const ViewpointConfig& config = {});

}  // namespace forge
