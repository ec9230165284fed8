#pragma once

#include "forge/eval.h"

#include "json.hpp"

#include <filesystem>
#include <memory>

namespace forge {

using Json = nlohmann::json;

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

Json to_json(const PinholeCamera& camera);
PinholeCamera camera_from_json(const Json& j);

Json to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

Json to_json(const ImageGoal& goal);
ImageGoal goal_from_json(const Json& j);

Json to_json(const Episode& episode);
Episode episode_from_json(const Json& j);

/// Manifest without the episode list.
Json manifest_json(const EpisodeDataset& dataset);

Json to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const Json& j);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
void write_trajectories(const std::vector<Trajectory>& trajectories,
                        const std::filesystem::path& path);

Json to_json(const EvalResult& result);
EvalResult eval_result_from_json(const Json& j);
Json to_json(const BatchReport& report);

/// Parses one JSON value, mapping syntax errors to ParseError.
Json parse_json(std::string_view text);

/// Scene and grid files stored next to the manifest.
inline constexpr std::string_view kSceneFile = "scene.txt";
inline constexpr std::string_view kGridFile = "grid.bin";

/// Dataset with the scene and grid it was generated on.
struct DatasetBundle {
  EpisodeDataset dataset;
  std::unique_ptr<Scene> scene;
  std::unique_ptr<OccupancyGrid> grid;

  const Episode* find(std::string_view episode_id) const;
};

/// Writes manifest, episodes, scene copy and grid into dir.
void write_bundle(const EpisodeDataset& dataset, const Scene& scene, const OccupancyGrid& grid,
                  const std::filesystem::path& dir);
DatasetBundle load_bundle(const std::filesystem::path& dir);

}  // namespace forge
