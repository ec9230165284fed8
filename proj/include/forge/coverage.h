#pragma once

#include "forge/render.h"
#include "forge/scene.h"

#include <span>
#include <string>
#include <vector>

namespace forge {

/// Goal-image acceptance thresholds: c_o > object_coverage_min and
/// c_f > slope * OSA + intercept (OSA in m^2, slope in 1/m^2).
struct Thresholds {
  double object_coverage_min = 0.7;
  double slope = 0.0232;
  double intercept = 0.02;
};

struct CandidateConfig {
  std::vector<double> radii = {0.5, 1.0, 1.5, 2.0};
  /// Polar angles 0, step, ..., 360 - step (degrees).
  double angle_step_deg = 10.0;
  double height_min = 0.8;
  double height_max = 1.5;
  double look_delta_deg = 5.0;
  double hfov_min_deg = 60.0;
  double hfov_max_deg = 120.0;
  int resolution = kGoalImageSize;
  /// Cameras closer than this to any triangle are discarded.
  double min_clearance = 0.05;
  /// Camera heights are measured from this floor level.
  double ground_y = 0.0;
  /// Keep full-frame renders in the candidate set (memory heavy).
  bool keep_renders = false;
};

struct Candidate {
  GoalCamera camera;
  std::size_t object_pixels = 0;
  double frame_coverage = 0.0;
  /// Extreme points of this view's object point cloud.
  std::vector<Vec3> hull_points;
  double observed_area = 0.0;
  double object_coverage = 0.0;
};

/// Scored candidate views of one object.
///
/// The reference cloud holds the hull extreme points of every candidate's
/// unprojected object pixels; its hull equals the hull of the full union.
struct CandidateSet {
  InstanceId object_id = 0;
  /// Grid cells sampled before discarding cameras embedded in geometry.
  std::size_t sampled = 0;
  std::vector<Candidate> candidates;
  /// Parallel to candidates when CandidateConfig::keep_renders is set.
  std::vector<Render> renders;
  std::vector<Vec3> reference_cloud;
  double osa = 0.0;
};

struct ImageGoal {
  GoalCamera camera;
  InstanceId object_id = 0;
  std::string category;
  double frame_coverage = 0.0;
  double object_coverage = 0.0;
  double osa = 0.0;
};

/// Candidate cameras on the (radius, angle) grid around the object centroid,
/// before discarding. One height/look-delta/hfov draw per cell, in grid order.
std::vector<GoalCamera> candidate_grid(const ObjectInstance& object, std::uint64_t seed,
                                       const CandidateConfig& config = {});

/// True when a camera origin is outside the scene bounds, within
/// min_clearance of a triangle, or enclosed by outward-wound geometry.
bool camera_embedded(const Scene& scene, const Vec3& origin, double min_clearance);

/// Samples, renders and scores the candidate views of `object`. Throws
/// ValidationError when the object has no labeled triangles.
CandidateSet sample_candidates(const Scene& scene, const ObjectInstance& object,
                               std::uint64_t seed, const CandidateConfig& config = {});

/// Fraction of pixels labeled `id`.
double frame_coverage(const Render& render, InstanceId id);

/// hull_area(cloud) / reference.osa clamped to [0, 1]; 0 when osa is 0.
double object_coverage(std::span<const Vec3> candidate_cloud, const CandidateSet& reference);
double coverage_ratio(double observed_area, double osa);

bool passes_thresholds(double frame_coverage, double object_coverage, double osa,
                       const Thresholds& thresholds);

/// Keeps exactly the candidates passing the strict thresholds.
std::vector<ImageGoal> select_goals(const CandidateSet& set, const Thresholds& thresholds,
                                    const std::string& category = {});

/// Runs the goal pipeline over every instance in id order. Per-object
/// streams are derived from (seed, object id).
std::vector<ImageGoal> generate_goals(const Scene& scene, std::uint64_t seed,
                                      const Thresholds& thresholds = {},
                                      const CandidateConfig& config = {});

}  // namespace forge
