#include "forge/coverage.h"

#include "forge/hull.h"
#include "forge/rng.h"

#include <algorithm>

namespace forge {

std::vector<GoalCamera> candidate_grid(const ObjectInstance& object, std::uint64_t seed,
                                       const CandidateConfig& config) {
  Rng rng(derive_seed(seed, object.id));
  const int angles = static_cast<int>(std::lround(360.0 / config.angle_step_deg));
  const double delta = deg_to_rad(config.look_delta_deg);
  std::vector<GoalCamera> cams;
  cams.reserve(config.radii.size() * angles);
  for (double r : config.radii) {
    for (int k = 0; k < angles; ++k) {
      const double theta = deg_to_rad(k * config.angle_step_deg);
      const double height = rng.uniform(config.height_min, config.height_max);
      const double d_pitch = rng.uniform(-delta, delta);
      const double d_yaw = rng.uniform(-delta, delta);
      const double hfov =
          deg_to_rad(rng.uniform(config.hfov_min_deg, config.hfov_max_deg));
      const Vec3 pos(object.centroid.x() + r * std::cos(theta), config.ground_y + height,
                     object.centroid.z() + r * std::sin(theta));
      GoalCamera cam = GoalCamera::looking_at(pos, object.centroid, hfov, config.resolution,
                                              config.resolution);
      cam.yaw = wrap_angle(cam.yaw + d_yaw);
      cam.pitch += d_pitch;
      cams.push_back(cam);
    }
  }
  return cams;
}

bool camera_embedded(const Scene& scene, const Vec3& origin, double min_clearance) {
  if (!scene.bounds().contains(origin)) return true;
  const auto& bvh = scene.bvh();
  if (bvh.any_within(origin, min_clearance)) return true;
  // Inside a closed, outward-wound solid the nearest hit along most axis
  // directions is a back face.
  int back = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      Vec3 dir = Vec3::Zero();
      dir[axis] = sign;
      const auto hit = bvh.intersect(origin, dir, kRayTMin, kInf);
      if (!hit) continue;
      const auto [a, b, c] = scene.triangle_vertices(hit->triangle);
      if ((b - a).cross(c - a).dot(dir) > 0.0) ++back;
    }
  }
  return back >= 4;
}

CandidateSet sample_candidates(const Scene& scene, const ObjectInstance& object,
                               std::uint64_t seed, const CandidateConfig& config) {
  if (scene.triangles_of(object.id).empty())
    throw ValidationError("coverage: object " + std::to_string(object.id) +
                          " has no labeled triangles");
  CandidateSet set;
  set.object_id = object.id;
  const auto grid = candidate_grid(object, seed, config);
  set.sampled = grid.size();

  for (const auto& cam : grid) {
    if (camera_embedded(scene, cam.position, config.min_clearance)) continue;
    Candidate c;
    c.camera = cam;
    set.candidates.push_back(std::move(c));
  }

  for (auto& c : set.candidates) {
    Render r = config.keep_renders
                   ? render(scene, c.camera)
                   : render(scene, c.camera, projected_bounds(c.camera, object.aabb));
    c.object_pixels = static_cast<std::size_t>(
        std::count(r.instance_mask.begin(), r.instance_mask.end(), object.id));
    c.frame_coverage = frame_coverage(r, object.id);
    const auto cloud = unproject(r, c.camera, object.id);
    const ConvexHull hull = convex_hull(cloud);
    c.observed_area = hull.area;
    c.hull_points.reserve(hull.vertices.size());
    for (std::size_t i : hull.vertices) c.hull_points.push_back(cloud[i]);
    set.reference_cloud.insert(set.reference_cloud.end(), c.hull_points.begin(),
                               c.hull_points.end());
    if (config.keep_renders) set.renders.push_back(std::move(r));
  }

  set.osa = hull_area(set.reference_cloud);
  for (auto& c : set.candidates) c.object_coverage = coverage_ratio(c.observed_area, set.osa);
  return set;
}

double frame_coverage(const Render& render, InstanceId id) {
  const std::size_t total = static_cast<std::size_t>(render.width) * render.height;
  if (total == 0) return 0.0;
  const auto hits = std::count(render.instance_mask.begin(), render.instance_mask.end(), id);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double coverage_ratio(double observed_area, double osa) {
  if (!(osa > 0.0)) return 0.0;
  return std::clamp(observed_area / osa, 0.0, 1.0);
}

double object_coverage(std::span<const Vec3> candidate_cloud, const CandidateSet& reference) {
  return coverage_ratio(hull_area(candidate_cloud), reference.osa);
}

bool passes_thresholds(double frame_coverage, double object_coverage, double osa,
                       const Thresholds& thresholds) {
  return object_coverage > thresholds.object_coverage_min &&
         frame_coverage > thresholds.slope * osa + thresholds.intercept;
}

std::vector<ImageGoal> select_goals(const CandidateSet& set, const Thresholds& thresholds,
                                    const std::string& category) {
  std::vector<ImageGoal> goals;
  for (const auto& c : set.candidates) {
    if (!passes_thresholds(c.frame_coverage, c.object_coverage, set.osa, thresholds)) continue;
    goals.push_back({c.camera, set.object_id, category, c.frame_coverage, c.object_coverage,
                     set.osa});
  }
  return goals;
}

std::vector<ImageGoal> generate_goals(const Scene& scene, std::uint64_t seed,
                                      const Thresholds& thresholds,
                                      const CandidateConfig& config) {
  std::vector<ImageGoal> goals;
  for (const auto& object : scene.instances()) {
    const CandidateSet set = sample_candidates(scene, object, seed, config);
    auto selected = select_goals(set, thresholds, object.category);
    goals.insert(goals.end(), std::make_move_iterator(selected.begin()),
                 std::make_move_iterator(selected.end()));
  }
  return goals;
}

}  // namespace forge
