#include "forge/episodes.h"

#include "forge/parallel.h"

#include <algorithm>
#include <array>

namespace forge {

namespace {

std::vector<Vec2> viewpoint_points(const std::vector<Viewpoint>& viewpoints) {
  std::vector<Vec2> pts;
  pts.reserve(viewpoints.size());
  for (const auto& v : viewpoints) pts.push_back(horizontal(v.position));
  return pts;
}

}  // namespace

ViewpointField::ViewpointField(const OccupancyGrid& grid, std::vector<Viewpoint> vps)
    : viewpoints(std::move(vps)), field(distance_field(grid, viewpoint_points(viewpoints))) {}

std::optional<ViewpointDistance> geodesic_to_viewpoints(const OccupancyGrid& grid,
                                                        const ViewpointField& targets,
                                                        const Vec2& p) {
  const auto cell = grid.cell_of(p);
  if (!cell || !grid.is_free(*cell)) return std::nullopt;
  const double g = targets.field.distance[*cell];
  if (!std::isfinite(g)) return std::nullopt;
  ViewpointDistance best{g, static_cast<std::size_t>(targets.field.source[*cell])};
  for (std::size_t i = 0; i < targets.viewpoints.size(); ++i) {
    const Vec2 v = horizontal(targets.viewpoints[i].position);
    const double e = (v - p).norm();
    if (e < best.distance && segment_free(grid, p, v)) best = {e, i};
  }
  return best;
}

std::optional<StartSample> sample_start(const OccupancyGrid& grid, const ViewpointField& targets,
                                        Rng& rng, int max_retries, double min_ratio) {
  if (targets.viewpoints.empty()) throw ValidationError("sample_start: no viewpoints");
  const auto cells = grid.free_cells();
  if (cells.empty()) return std::nullopt;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const std::size_t cell = cells[rng.below(cells.size())];
    const Vec2 p = grid.origin() + grid.cell_size() * Vec2(grid.ix_of(cell) + rng.uniform(),
                                                           grid.iz_of(cell) + rng.uniform());
    const double heading = rng.uniform(0.0, kTwoPi);
    const auto geo = geodesic_to_viewpoints(grid, targets, p);
    if (!geo) continue;
    const auto vp = geo->viewpoint;
    const double euclid = (horizontal(targets.viewpoints[vp].position) - p).norm();
    if (!(euclid > 1e-9) || !(geo->distance / euclid > min_ratio)) continue;
    StartSample s;
    s.pose.position = Vec3(p.x(), grid.floor_y(*grid.cell_of(p)), p.y());
    s.pose.heading = heading;
    s.geodesic_distance = geo->distance;
    s.euclidean_distance = euclid;
    s.nearest_viewpoint = vp;
    return s;
  }
  return std::nullopt;
}

std::optional<StartSample> sample_start(const OccupancyGrid& grid,
                                        const std::vector<Viewpoint>& viewpoints,
                                        std::uint64_t seed, int max_retries, double min_ratio) {
  const ViewpointField targets(grid, viewpoints);
  Rng rng(seed);
  return sample_start(grid, targets, rng, max_retries, min_ratio);
}

std::vector<std::size_t> allocate_goals(std::size_t episodes, std::size_t goals) {
  std::vector<std::size_t> out(episodes);
  for (std::size_t k = 0; k < episodes; ++k) out[k] = goals == 0 ? 0 : k % goals;
  return out;
}

EpisodeDataset generate_dataset(const Scene& scene, const std::string& scene_id,
                                const std::vector<ImageGoal>& goals, const OccupancyGrid& grid,
                                const AgentBody& body, const DatasetConfig& config) {
  std::map<InstanceId, std::vector<const ImageGoal*>> by_object;
  for (const auto& g : goals) by_object[g.object_id].push_back(&g);
  std::vector<InstanceId> objects;
  for (const auto& [id, _] : by_object) objects.push_back(id);

  struct Outcome {
    std::vector<Episode> episodes;
    std::optional<SkippedObject> skipped;
  };
  std::vector<Outcome> outcomes(objects.size());
  parallel_for(objects.size(), [&](std::size_t i) {
    const InstanceId id = objects[i];
    const ObjectInstance& object = scene.instance(id);
    const auto& object_goals = by_object.at(id);
    auto vps = compute_viewpoints(scene, grid, object, body);
    if (vps.empty()) {
      outcomes[i].skipped = SkippedObject{id, "no valid viewpoints"};
      return;
    }
    const ViewpointField targets(grid, std::move(vps));
    Rng rng(derive_seed(config.seed, fnv1a(scene_id), id));
    const auto allocation = allocate_goals(config.starts_per_instance, object_goals.size());
    std::vector<Episode> episodes;
    for (std::size_t k = 0; k < config.starts_per_instance; ++k) {
      const auto start =
          sample_start(grid, targets, rng, config.max_retries, config.min_ratio);
      if (!start) {
        outcomes[i].skipped = SkippedObject{id, "start sampling exhausted after " +
                                                    std::to_string(config.max_retries) +
                                                    " retries"};
        return;
      }
      Episode e;
      e.episode_id = scene_id + ":" + std::to_string(id) + ":" + std::to_string(k);
      e.scene_id = scene_id;
      e.start = start->pose;
      e.goal_index = allocation[k];
      e.goal = *object_goals[e.goal_index];
      e.goal.category = object.category;
      e.object_category = object.category;
      e.geodesic_distance = start->geodesic_distance;
      e.euclidean_distance = start->euclidean_distance;
      e.nearest_viewpoint = start->nearest_viewpoint;
      e.viewpoints = targets.viewpoints;
      episodes.push_back(std::move(e));
    }
    outcomes[i].episodes = std::move(episodes);
  });

  EpisodeDataset ds;
  ds.scene_id = scene_id;
  ds.provenance.seed = config.seed;
  ds.provenance.starts_per_instance = config.starts_per_instance;
  ds.provenance.max_retries = config.max_retries;
  ds.provenance.min_ratio = config.min_ratio;
  ds.provenance.cell_size = grid.cell_size();
  for (auto& o : outcomes) {
    if (o.skipped) ds.provenance.skipped.push_back(*o.skipped);
    for (auto& e : o.episodes) ds.episodes.push_back(std::move(e));
  }
  return ds;
}

std::string revalidate_episode(const Episode& e, const OccupancyGrid& grid, double min_ratio) {
  if (e.viewpoints.empty()) return "no viewpoints";
  if (e.nearest_viewpoint >= e.viewpoints.size()) return "nearest viewpoint index out of range";
  if (e.goal.object_id != e.viewpoints.front().object_id) return "viewpoints of another object";
  if (e.object_category != e.goal.category) return "category mismatch";
  const Vec2 start = horizontal(e.start.position);
  // Single-source search from the start, read at each viewpoint, rather
  // than the multi-source field used during generation.
  const std::array<Vec2, 1> source{start};
  const DistanceField from_start = distance_field(grid, source);
  double best = kInf;
  std::vector<double> geo(e.viewpoints.size(), kInf);
  for (std::size_t i = 0; i < e.viewpoints.size(); ++i) {
    const Vec2 v = horizontal(e.viewpoints[i].position);
    if (segment_free(grid, start, v)) {
      geo[i] = (v - start).norm();
    } else if (const auto cell = grid.snap(v, kSnapDistance)) {
      geo[i] = from_start.distance[*cell];
    }
    best = std::min(best, geo[i]);
  }
  if (!std::isfinite(best)) return "geodesic distance is not finite";
  if (std::abs(best - e.geodesic_distance) > 1e-9) return "stored geodesic is not the minimum";
  if (std::abs(geo[e.nearest_viewpoint] - best) > 1e-9)
    return "nearest viewpoint does not attain the minimum";
  const double euclid = (horizontal(e.viewpoints[e.nearest_viewpoint].position) - start).norm();
  if (std::abs(euclid - e.euclidean_distance) > 1e-9) return "stored euclidean distance mismatch";
  if (!(e.geodesic_distance / e.euclidean_distance > min_ratio))
    return "geodesic / euclidean ratio not above threshold";
  return {};
}

}  // namespace forge
