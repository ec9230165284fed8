#include "forge/render.h"

#include "forge/parallel.h"
#include "forge/rng.h"

#include <algorithm>

namespace forge {

void PinholeCamera::validate() const {
  if (!(hfov > 0.0 && hfov < kPi)) throw ValidationError("camera: hfov must be in (0, pi)");
  if (width < 1 || height < 1) throw ValidationError("camera: resolution must be positive");
  if (!position.allFinite() || !std::isfinite(yaw) || !std::isfinite(pitch))
    throw ValidationError("camera: pose must be finite");
}

Vec3 PinholeCamera::forward() const {
  const double cp = std::cos(pitch);
  return {-std::sin(yaw) * cp, std::sin(pitch), -std::cos(yaw) * cp};
}

Vec3 PinholeCamera::right() const { return {std::cos(yaw), 0.0, -std::sin(yaw)}; }

Vec3 PinholeCamera::up() const { return right().cross(forward()); }

Vec3 PinholeCamera::pixel_ray(int col, int row) const {
  const double f = focal_length();
  const double x = (col + 0.5 - 0.5 * width) / f;
  const double y = (row + 0.5 - 0.5 * height) / f;
  return (forward() + x * right() - y * up()).normalized();
}

std::optional<Vec2> PinholeCamera::project(const Vec3& p) const {
  const Vec3 d = p - position;
  const double z = d.dot(forward());
  if (!(z > 0.0)) return std::nullopt;
  const double f = focal_length();
  return Vec2(0.5 * width + f * d.dot(right()) / z, 0.5 * height - f * d.dot(up()) / z);
}

PinholeCamera PinholeCamera::looking_at(const Vec3& position, const Vec3& target, double hfov,
                                        int width, int height) {
  const Vec3 d = target - position;
  PinholeCamera cam;
  cam.position = position;
  cam.yaw = wrap_angle(std::atan2(-d.x(), -d.z()));
  cam.pitch = std::atan2(d.y(), std::hypot(d.x(), d.z()));
  cam.hfov = hfov;
  cam.width = width;
  cam.height = height;
  return cam;
}

std::array<std::uint8_t, 3> instance_color(InstanceId id) {
  if (id == kStructureId) return {160, 160, 160};
  const std::uint64_t h = mix64(id);
  // Keep colors away from black so shading stays visible.
  return {static_cast<std::uint8_t>(64 + (h & 0xbf)), static_cast<std::uint8_t>(64 + ((h >> 8) & 0xbf)),
          static_cast<std::uint8_t>(64 + ((h >> 16) & 0xbf))};
}

PixelRect projected_bounds(const PinholeCamera& camera, const Aabb& box) {
  const PixelRect full{0, 0, camera.width, camera.height};
  if (box.empty()) return {0, 0, 0, 0};
  double u0 = kInf, v0 = kInf, u1 = -kInf, v1 = -kInf;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner((i & 1) ? box.hi.x() : box.lo.x(), (i & 2) ? box.hi.y() : box.lo.y(),
                      (i & 4) ? box.hi.z() : box.lo.z());
    // Corners close to or behind the image plane can project anywhere.
    if ((corner - camera.position).dot(camera.forward()) < 1e-3) return full;
    const auto uv = camera.project(corner);
    if (!uv) return full;
    u0 = std::min(u0, uv->x());
    u1 = std::max(u1, uv->x());
    v0 = std::min(v0, uv->y());
    v1 = std::max(v1, uv->y());
  }
  // A pixel is included when its center (c + 0.5) may fall in [u0, u1];
  // one extra pixel of slack absorbs rounding.
  auto clamp_col = [&](double v) { return std::clamp(static_cast<int>(v), 0, camera.width); };
  auto clamp_row = [&](double v) { return std::clamp(static_cast<int>(v), 0, camera.height); };
  if (u1 < -1.0 || v1 < -1.0 || u0 > camera.width + 1.0 || v0 > camera.height + 1.0)
    return {0, 0, 0, 0};
  return {clamp_col(std::floor(u0 - 0.5) - 1), clamp_row(std::floor(v0 - 0.5) - 1),
          clamp_col(std::ceil(u1 - 0.5) + 2), clamp_row(std::ceil(v1 - 0.5) + 2)};
}

Render render(const Scene& scene, const PinholeCamera& camera) {
  return render(scene, camera, PixelRect{0, 0, camera.width, camera.height});
}

Render render(const Scene& scene, const PinholeCamera& camera, const PixelRect& roi) {
  camera.validate();
  Render out;
  out.width = camera.width;
  out.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(camera.width) * camera.height;
  out.depth.assign(n, std::numeric_limits<float>::infinity());
  out.instance_mask.assign(n, kStructureId);
  out.rgb.assign(3 * n, 0);

  const auto& bvh = scene.bvh();
  const auto labels = scene.triangle_instance();
  const Vec3 light = Vec3(0.3, 0.9, 0.4).normalized();
  const int rows = std::max(0, roi.row1 - roi.row0);
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
    const int row = roi.row0 + static_cast<int>(r);
    for (int col = roi.col0; col < roi.col1; ++col) {
      const Vec3 dir = camera.pixel_ray(col, row);
      const auto hit = bvh.intersect(camera.position, dir, kRayTMin, kInf);
      if (!hit) continue;
      const std::size_t i = out.index(col, row);
      out.depth[i] = static_cast<float>(hit->t);
      out.instance_mask[i] = labels[hit->triangle];
      const auto [a, b, c] = scene.triangle_vertices(hit->triangle);
      const Vec3 normal = (b - a).cross(c - a).normalized();
      const double shade = 0.55 + 0.45 * std::abs(normal.dot(light));
      const auto color = instance_color(out.instance_mask[i]);
      for (int k = 0; k < 3; ++k)
        out.rgb[3 * i + k] = static_cast<std::uint8_t>(std::lround(color[k] * shade));
    }
  });
  return out;
}

std::vector<Vec3> unproject(const Render& render, const PinholeCamera& camera, InstanceId id) {
  std::vector<Vec3> cloud;
  for (int row = 0; row < render.height; ++row) {
    for (int col = 0; col < render.width; ++col) {
      const std::size_t i = render.index(col, row);
      if (render.instance_mask[i] != id || !std::isfinite(render.depth[i])) continue;
      cloud.push_back(camera.position + static_cast<double>(render.depth[i]) * camera.pixel_ray(col, row));
    }
  }
  return cloud;
}

bool line_of_sight(const Scene& scene, const Vec3& from, const Vec3& to) {
  const Vec3 d = to - from;
  const double len = d.norm();
  if (len <= 2.0 * kSegmentEpsilon) return true;
  return !scene.bvh().occluded(from, d / len, kSegmentEpsilon, len - kSegmentEpsilon);
}

}  // namespace forge
