#pragma once

#include "forge/common.h"
#include "forge/scene.h"

#include <optional>
#include <span>
#include <vector>

namespace forge {

/// Calibrated pinhole camera with square pixels.
///
/// Orientation: yaw rotates about +y (yaw 0 looks down -z, positive yaw
/// turns left), pitch tilts the principal axis up. Pixel (0, 0) is the
/// top-left corner; rays go through pixel centers.
struct PinholeCamera {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double hfov = kPi / 2;
  int width = 512;
  int height = 512;

  /// Throws ValidationError unless 0 < hfov < pi and the size is positive.
  void validate() const;

  double focal_length() const { return 0.5 * width / std::tan(0.5 * hfov); }
  double vfov() const { return 2.0 * std::atan(0.5 * height / focal_length()); }

  Vec3 forward() const;
  Vec3 right() const;
  Vec3 up() const;

  /// Unit ray direction through the center of pixel (col, row).
  Vec3 pixel_ray(int col, int row) const;

  /// Continuous image coordinates of a world point, or nullopt when the
  /// point is not strictly in front of the camera.
  std::optional<Vec2> project(const Vec3& p) const;

  /// Camera whose principal axis points from `position` at `target`.
  static PinholeCamera looking_at(const Vec3& position, const Vec3& target, double hfov,
                                  int width, int height);
};

using GoalCamera = PinholeCamera;

/// Goal-image resolution used for coverage.
inline constexpr int kGoalImageSize = 512;

struct Render {
  int width = 0;
  int height = 0;
  /// Euclidean distance along the pixel ray; +inf where nothing was hit.
  std::vector<float> depth;
  /// Instance id of the hit triangle; 0 on miss or structure.
  std::vector<InstanceId> instance_mask;
  /// Interleaved RGB8, flat per-instance pseudo-color.
  std::vector<std::uint8_t> rgb;

  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * width + col;
  }
};

/// Pixel rectangle [col0, col1) x [row0, row1).
struct PixelRect {
  int col0 = 0;
  int row0 = 0;
  int col1 = 0;
  int row1 = 0;
};

inline constexpr double kRayTMin = 1e-7;

/// Nearest-hit raycast through every pixel center.
Render render(const Scene& scene, const PinholeCamera& camera);

/// Raycasts only the pixels inside `roi`; all other pixels are misses.
Render render(const Scene& scene, const PinholeCamera& camera, const PixelRect& roi);

/// Pixel rectangle guaranteed to contain every pixel whose center ray can hit
/// `box`; the full frame when the box is not entirely in front of the camera.
PixelRect projected_bounds(const PinholeCamera& camera, const Aabb& box);

/// One world-space point per pixel labeled `id`, in row-major pixel order.
std::vector<Vec3> unproject(const Render& render, const PinholeCamera& camera, InstanceId id);

inline constexpr double kSegmentEpsilon = 1e-4;

/// True iff the open segment between the points meets no triangle, ignoring
/// hits within kSegmentEpsilon of either endpoint.
bool line_of_sight(const Scene& scene, const Vec3& from, const Vec3& to);

/// Flat pseudo-color for an instance id; structure is gray.
std::array<std::uint8_t, 3> instance_color(InstanceId id);

}  // namespace forge
