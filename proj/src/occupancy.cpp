#include "forge/nav.h"

#include "forge/render.h"
#include "forge/rng.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <queue>

namespace forge {

namespace {

constexpr char kGridMagic[4] = {'F', 'G', 'R', 'D'};
constexpr std::uint32_t kGridVersion = 1;

// Intersection of a triangle with the slab y0 <= y <= y1, as a convex
// polygon (possibly empty).
std::vector<Vec3> clip_to_slab(const std::array<Vec3, 3>& tri, double y0, double y1) {
  std::vector<Vec3> poly(tri.begin(), tri.end());
  auto clip = [](const std::vector<Vec3>& in, double level, bool keep_above) {
    std::vector<Vec3> out;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& p = in[i];
      const Vec3& q = in[(i + 1) % n];
      const double dp = keep_above ? p.y() - level : level - p.y();
      const double dq = keep_above ? q.y() - level : level - q.y();
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) out.push_back(p + (q - p) * (dp / (dp - dq)));
    }
    return out;
  };
  poly = clip(poly, y0, true);
  if (poly.empty()) return poly;
  return clip(poly, y1, false);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

// Horizontal distance from p to the (x, z) projection of a convex polygon.
double footprint_polygon_distance(const std::vector<Vec3>& poly, const Vec2& p) {
  const std::size_t n = poly.size();
  if (n == 0) return kInf;
  if (n == 1) return (horizontal(poly[0]) - p).norm();
  double signed_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = horizontal(poly[i]);
    const Vec2 b = horizontal(poly[(i + 1) % n]);
    signed_area += a.x() * b.y() - b.x() * a.y();
  }
  if (std::abs(signed_area) > 1e-18) {
    const double sign = signed_area > 0.0 ? 1.0 : -1.0;
    bool inside = true;
    for (std::size_t i = 0; i < n && inside; ++i) {
      const Vec2 a = horizontal(poly[i]);
      const Vec2 b = horizontal(poly[(i + 1) % n]);
      const Vec2 e = b - a;
      const Vec2 d = p - a;
      if (sign * (e.x() * d.y() - e.y() * d.x()) < 0.0) inside = false;
    }
    if (inside) return 0.0;
  }
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best,
                    point_segment_distance(p, horizontal(poly[i]), horizontal(poly[(i + 1) % n])));
  return best;
}

}  // namespace

void AgentBody::validate() const {
  if (!(radius > 0.0)) throw ValidationError("agent body: radius must be positive");
  if (!(sensor_height < height)) throw ValidationError("agent body: sensor above body height");
}

OccupancyGrid::OccupancyGrid(Vec2 origin, double cell_size, int nx, int nz)
    : origin_(std::move(origin)),
      cell_size_(cell_size),
      nx_(nx),
      nz_(nz),
      free_(static_cast<std::size_t>(nx) * nz, 0),
      floor_y_(static_cast<std::size_t>(nx) * nz, std::numeric_limits<double>::quiet_NaN()) {}

std::optional<std::size_t> OccupancyGrid::cell_of(const Vec2& p) const {
  const double fx = std::floor((p.x() - origin_.x()) / cell_size_);
  const double fz = std::floor((p.y() - origin_.y()) / cell_size_);
  if (!(fx >= 0.0 && fz >= 0.0 && fx < nx_ && fz < nz_)) return std::nullopt;
  return index(static_cast<int>(fx), static_cast<int>(fz));
}

Vec2 OccupancyGrid::center(std::size_t i) const {
  return origin_ + cell_size_ * Vec2(ix_of(i) + 0.5, iz_of(i) + 0.5);
}

std::size_t OccupancyGrid::free_count() const {
  return static_cast<std::size_t>(std::count(free_.begin(), free_.end(), 1));
}

std::vector<std::size_t> OccupancyGrid::free_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < free_.size(); ++i)
    if (free_[i]) out.push_back(i);
  return out;
}

std::optional<std::size_t> OccupancyGrid::snap(const Vec2& p, double max_distance) const {
  if (const auto c = cell_of(p); c && is_free(*c)) return c;
  const int reach = static_cast<int>(std::ceil(max_distance / cell_size_)) + 1;
  const int cx = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_size_));
  const int cz = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_size_));
  std::optional<std::size_t> best;
  double best_d = max_distance;
  for (int iz = cz - reach; iz <= cz + reach; ++iz) {
    for (int ix = cx - reach; ix <= cx + reach; ++ix) {
      if (!in_bounds(ix, iz)) continue;
      const std::size_t i = index(ix, iz);
      if (!is_free(i)) continue;
      const double d = (center(i) - p).norm();
      if (d < best_d || (d == best_d && best && i < *best)) {
        best_d = d;
        best = i;
      }
    }
  }
  return best;
}

OccupancyGrid build_occupancy(const Scene& scene, const AgentBody& body,
                              const OccupancyConfig& config) {
  body.validate();
  if (!(config.cell_size > 0.0 && config.cell_size <= body.radius))
    throw ValidationError("occupancy: cell size must be in (0, radius]");
  const Aabb& b = scene.bounds();
  if (b.empty()) throw Error("occupancy: degenerate scene (no floor)");
  const int nx = std::max(1, static_cast<int>(std::ceil((b.hi.x() - b.lo.x()) / config.cell_size)));
  const int nz = std::max(1, static_cast<int>(std::ceil((b.hi.z() - b.lo.z()) / config.cell_size)));
  OccupancyGrid grid(Vec2(b.lo.x(), b.lo.z()), config.cell_size, nx, nz);

  const auto& bvh = scene.bvh();
  std::size_t supported = 0;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const Vec2 c = grid.center(i);
    const Vec3 probe(c.x(), config.ground_y + config.probe_range, c.y());
    const auto hit = bvh.intersect(probe, Vec3(0.0, -1.0, 0.0), 0.0, 2.0 * config.probe_range);
    if (!hit) continue;
    ++supported;
    const double floor = probe.y() - hit->t;
    const double y0 = floor + config.step_height;
    const double y1 = floor + body.height;
    const Aabb column{{c.x() - body.radius, y0, c.y() - body.radius},
                      {c.x() + body.radius, y1, c.y() + body.radius}};
    bool blocked = false;
    bvh.for_each_overlapping(column, [&](std::uint32_t t) {
      if (blocked) return;
      const auto poly = clip_to_slab(scene.triangle_vertices(t), y0, y1);
      if (footprint_polygon_distance(poly, c) < body.radius) blocked = true;
    });
    grid.set(i, !blocked, floor);
  }
  if (supported == 0) throw Error("occupancy: degenerate scene (no floor)");
  return grid;
}

void save_grid(const OccupancyGrid& grid, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  out.write(kGridMagic, 4);
  put(kGridVersion);
  put(static_cast<std::int32_t>(grid.nx()));
  put(static_cast<std::int32_t>(grid.nz()));
  put(grid.cell_size());
  put(grid.origin().x());
  put(grid.origin().y());
  std::vector<std::uint8_t> bits((grid.cell_count() + 7) / 8, 0);
  for (std::size_t i = 0; i < grid.cell_count(); ++i)
    if (grid.is_free(i)) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  for (std::size_t i = 0; i < grid.cell_count(); ++i) put(grid.floor_y(i));
  if (!out) throw IoError("write failed for " + path.string());
}

OccupancyGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto get = [&](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof(v)); };
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0;
  std::int32_t nx = 0, nz = 0;
  double cell = 0.0, ox = 0.0, oz = 0.0;
  get(version);
  get(nx);
  get(nz);
  get(cell);
  get(ox);
  get(oz);
  if (!in || std::memcmp(magic, kGridMagic, 4) != 0 || version != kGridVersion || nx <= 0 ||
      nz <= 0 || !(cell > 0.0))
    throw ParseError("grid file: bad header in " + path.string());
  OccupancyGrid grid(Vec2(ox, oz), cell, nx, nz);
  std::vector<std::uint8_t> bits((grid.cell_count() + 7) / 8);
  in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    double floor = 0.0;
    get(floor);
    grid.set(i, (bits[i / 8] >> (i % 8)) & 1u, floor);
  }
  if (!in) throw ParseError("grid file: truncated " + path.string());
  return grid;
}

DistanceField distance_field(const OccupancyGrid& grid, std::span<const Vec2> sources) {
  DistanceField field;
  field.distance.assign(grid.cell_count(), kInf);
  field.source.assign(grid.cell_count(), -1);
  using Entry = std::tuple<double, int, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto cell = grid.snap(sources[s], kSnapDistance);
    if (!cell) continue;
    if (field.distance[*cell] == 0.0 && field.source[*cell] >= 0) continue;
    field.distance[*cell] = 0.0;
    field.source[*cell] = static_cast<int>(s);
    open.emplace(0.0, static_cast<int>(s), *cell);
  }
  const double straight = grid.cell_size();
  const double diagonal = grid.cell_size() * std::numbers::sqrt2;
  while (!open.empty()) {
    const auto [d, src, cell] = open.top();
    open.pop();
    if (d > field.distance[cell] || (d == field.distance[cell] && src != field.source[cell]))
      continue;
    const int ix = grid.ix_of(cell);
    const int iz = grid.iz_of(cell);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dz == 0) continue;
        const int jx = ix + dx;
        const int jz = iz + dz;
        if (!grid.in_bounds(jx, jz)) continue;
        const std::size_t next = grid.index(jx, jz);
        if (!grid.is_free(next)) continue;
        if (dx != 0 && dz != 0 &&
            (!grid.is_free(grid.index(ix + dx, iz)) || !grid.is_free(grid.index(ix, iz + dz))))
          continue;
        const double nd = d + ((dx != 0 && dz != 0) ? diagonal : straight);
        if (nd < field.distance[next] || (nd == field.distance[next] && src < field.source[next])) {
          field.distance[next] = nd;
          field.source[next] = src;
          open.emplace(nd, src, next);
        }
      }
    }
  }
  return field;
}

bool segment_free(const OccupancyGrid& grid, const Vec2& a, const Vec2& b) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * grid.cell_size()))));
  if (!grid.is_free(a)) return false;
  for (int k = 1; k <= n; ++k) {
    if (!grid.is_free(a + (b - a) * (static_cast<double>(k) / n))) return false;
  }
  return true;
}

std::optional<double> geodesic_distance(const OccupancyGrid& grid, const Vec2& from,
                                        const Vec2& to) {
  const auto a = grid.snap(from, kSnapDistance);
  const auto b = grid.snap(to, kSnapDistance);
  if (!a || !b) return std::nullopt;
  if (*a == *b) return 0.0;
  const std::array<Vec2, 1> src{grid.center(*a)};
  const DistanceField field = distance_field(grid, src);
  const double d = field.distance[*b];
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

std::vector<Vec2> sample_standable(const OccupancyGrid& grid, std::uint64_t seed, std::size_t n) {
  const auto cells = grid.free_cells();
  if (cells.empty()) throw Error("sample_standable: grid has no free cells");
  Rng rng(derive_seed(seed, 0x57a9d));
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t cell = cells[rng.below(cells.size())];
    const double u = rng.uniform();
    const double v = rng.uniform();
    out.push_back(grid.origin() +
                  grid.cell_size() * Vec2(grid.ix_of(cell) + u, grid.iz_of(cell) + v));
  }
  return out;
}

}  // namespace forge
