#include "forge/nav.h"

#include "forge/parallel.h"
#include "forge/render.h"

#include <algorithm>

namespace forge {

std::vector<Vec3> surface_samples(const Scene& scene, InstanceId id, std::size_t count) {
  const auto tris = scene.triangles_of(id);
  std::vector<Vec3> out;
  if (tris.empty() || count == 0) return out;
  std::vector<double> cdf;
  cdf.reserve(tris.size());
  double total = 0.0;
  for (auto t : tris) {
    const auto [a, b, c] = scene.triangle_vertices(t);
    total += 0.5 * (b - a).cross(c - a).norm();
    cdf.push_back(total);
  }
  // Stratified over cumulative area; R2 low-discrepancy barycentrics.
  constexpr double kG1 = 0.7548776662466927;
  constexpr double kG2 = 0.5698402909980532;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (i + 0.5) / static_cast<double>(count);
    std::size_t k = 0;
    if (total > 0.0) {
      k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u * total) - cdf.begin());
      k = std::min(k, tris.size() - 1);
    } else {
      k = i % tris.size();
    }
    double s = std::fmod(0.5 + kG1 * (i + 1), 1.0);
    double t = std::fmod(0.5 + kG2 * (i + 1), 1.0);
    if (s + t > 1.0) {
      s = 1.0 - s;
      t = 1.0 - t;
    }
    const auto [a, b, c] = scene.triangle_vertices(tris[k]);
    out.push_back(a + s * (b - a) + t * (c - a));
  }
  return out;
}

std::vector<Viewpoint> compute_viewpoints(const Scene& scene, const OccupancyGrid& grid,
                                          const ObjectInstance& object, const AgentBody& body,
                                          const ViewpointConfig& config) {
  const double spacing = config.spacing > 0.0 ? config.spacing : body.radius / 2.0;
  const auto samples =
      surface_samples(scene, object.id, std::max<std::size_t>(config.surface_samples, 64));
  const double reach = config.max_distance;
  const auto i0 = static_cast<long>(std::floor((object.aabb.lo.x() - reach) / spacing));
  const auto i1 = static_cast<long>(std::ceil((object.aabb.hi.x() + reach) / spacing));
  const auto k0 = static_cast<long>(std::floor((object.aabb.lo.z() - reach) / spacing));
  const auto k1 = static_cast<long>(std::ceil((object.aabb.hi.z() + reach) / spacing));

  struct Site {
    Vec2 p;
    std::size_t cell;
  };
  std::vector<Site> sites;
  for (long k = k0; k <= k1; ++k) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 p(i * spacing, k * spacing);
      if (footprint_distance(object.aabb, p) > reach) continue;
      const auto cell = grid.cell_of(p);
      if (!cell || !grid.is_free(*cell)) continue;
      sites.push_back({p, *cell});
    }
  }

  std::vector<std::uint8_t> visible(sites.size(), 0);
  parallel_for(sites.size(), [&](std::size_t s) {
    const double floor = grid.floor_y(sites[s].cell);
    const Vec3 eye(sites[s].p.x(), floor + body.sensor_height, sites[s].p.y());
    visible[s] = std::any_of(samples.begin(), samples.end(),
                             [&](const Vec3& q) { return line_of_sight(scene, eye, q); });
  });

  std::vector<Viewpoint> out;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (!visible[s]) continue;
    const double floor = grid.floor_y(sites[s].cell);
    out.push_back({Vec3(sites[s].p.x(), floor, sites[s].p.y()), object.id});
  }
  return out;
}

}  // namespace forge
