#pragma once

#include "forge/coverage.h"
#include "forge/nav.h"
#include "forge/rng.h"
#include "forge/scene.h"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forge {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kDatasetSchemaVersion = 1;

struct Episode {
  std::string episode_id;
  std::string scene_id;
  Pose start;
  ImageGoal goal;
  /// Position of the goal among its object's image goals.
  std::size_t goal_index = 0;
  std::string object_category;
  /// Minimum over viewpoints of the geodesic distance from the start.
  double geodesic_distance = 0.0;
  /// Horizontal distance from the start to the viewpoint attaining the minimum.
  double euclidean_distance = 0.0;
  std::size_t nearest_viewpoint = 0;
  std::vector<Viewpoint> viewpoints;
};

struct SkippedObject {
  InstanceId object_id = 0;
  std::string reason;
};

struct DatasetConfig {
  std::size_t starts_per_instance = 20;
  int max_retries = 200;
  double min_ratio = 1.05;
  std::uint64_t seed = 0;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t starts_per_instance = 0;
  int max_retries = 0;
  double min_ratio = 1.05;
  Thresholds thresholds;
  double cell_size = 0.05;
  std::string tool_version{kToolVersion};
  std::vector<SkippedObject> skipped;
};

struct EpisodeDataset {
  std::string split = "desk";
  std::string scene_id;
  /// Scene file location as given at generation time.
  std::string scene_path;
  std::vector<Episode> episodes;
  Provenance provenance;
};

/// Viewpoints of one object with their multi-source geodesic field.
struct ViewpointField {
  std::vector<Viewpoint> viewpoints;
  DistanceField field;

  ViewpointField(const OccupancyGrid& grid, std::vector<Viewpoint> viewpoints);
};

struct ViewpointDistance {
  double distance = 0.0;
  std::size_t viewpoint = 0;
};

/// Shortest path length from p to the viewpoint set with the viewpoint that
/// attains it. A viewpoint reachable along a collision-free straight segment
/// is at its Euclidean distance; otherwise the grid geodesic applies.
/// nullopt when p is off the grid, blocked, or cut off from every viewpoint.
std::optional<ViewpointDistance> geodesic_to_viewpoints(const OccupancyGrid& grid,
                                                        const ViewpointField& targets,
                                                        const Vec2& p);

struct StartSample {
  Pose pose;
  double geodesic_distance = 0.0;
  double euclidean_distance = 0.0;
  std::size_t nearest_viewpoint = 0;
};

/// Draws uniform standable poses (uniform heading) until one has a finite
/// geodesic to the viewpoints and geodesic / Euclidean > min_ratio, with
/// Euclidean measured to the viewpoint attaining the geodesic minimum (see
/// geodesic_to_viewpoints).
/// Returns nullopt after max_retries rejections.
std::optional<StartSample> sample_start(const OccupancyGrid& grid, const ViewpointField& targets,
                                        Rng& rng, int max_retries = 200,
                                        double min_ratio = 1.05);
std::optional<StartSample> sample_start(const OccupancyGrid& grid,
                                        const std::vector<Viewpoint>& viewpoints,
                                        std::uint64_t seed, int max_retries = 200,
                                        double min_ratio = 1.05);

/// Goal index per episode: round-robin, so counts differ by at most one.
std::vector<std::size_t> allocate_goals(std::size_t episodes, std::size_t goals);

/// Builds episodes for every object that has image goals. Objects without
/// viewpoints or whose start sampling is exhausted are skipped and recorded
/// in the provenance. Per-object streams derive from (seed, scene id, object
/// id), so the output does not depend on evaluation order.
EpisodeDataset generate_dataset(const Scene& scene, const std::string& scene_id,
                                const std::vector<ImageGoal>& goals, const OccupancyGrid& grid,
                                const AgentBody& body, const DatasetConfig& config);

/// Independent re-check of an episode against the grid: finite geodesic
/// matching the stored minimum, ratio above min_ratio, stored Euclidean
/// distance. Returns an empty string when valid, else the first failure.
std::string revalidate_episode(const Episode& episode, const OccupancyGrid& grid,
                               double min_ratio = 1.05);

/// Writes manifest.json and episodes.jsonl into dir.
void write_dataset(const EpisodeDataset& dataset, const std::filesystem::path& dir);
EpisodeDataset read_dataset(const std::filesystem::path& dir);

std::string episode_to_json_line(const Episode& episode);
Episode episode_from_json_line(std::string_view line);

std::string goal_to_json_line(const ImageGoal& goal);
ImageGoal goal_from_json_line(std::string_view line);
void write_goals(const std::vector<ImageGoal>& goals, const std::filesystem::path& path);
std::vector<ImageGoal> read_goals(const std::filesystem::path& path);

struct Histogram {
  double bin_width = 0.0;
  double origin = 0.0;  // lower edge of the first bin
  std::vector<std::size_t> counts;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;

  /// Fixed-width bins spanning floor(min / w) * w through the maximum.
  static Histogram build(const std::vector<double>& values, double bin_width);
};

struct CategoryCounts {
  std::size_t objects = 0;
  std::size_t goals = 0;
  std::size_t episodes = 0;
};

struct DatasetStats {
  std::size_t episodes = 0;
  Histogram euclidean;
  Histogram geodesic;
  Histogram ratio;
  std::map<std::string, CategoryCounts> categories;
};

DatasetStats dataset_stats(const EpisodeDataset& dataset);
std::string stats_to_json(const DatasetStats& stats);
/// Rows: histogram,bin_lo,bin_hi,count.
std::string stats_to_csv(const DatasetStats& stats);

}  // namespace forge
