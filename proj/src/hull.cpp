#include "forge/hull.h"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace forge {

namespace {

// Relative tolerance for classifying the input as degenerate.
constexpr double kDegenerateTolerance = 1e-9;

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Visibility is decided exactly on coordinates snapped to a 2^-40 lattice
// of the cloud extent, so nearly coplanar points cannot produce an
// inconsistent horizon. Distances used to pick the apex are approximate.
class QuickHull {
 public:
  static constexpr double kLattice = 1099511627776.0;  // 2^40

  QuickHull(std::span<const Vec3> points, const Aabb& box) : pts_(points), q_(points.size()) {
    const double span = std::max({box.extent().x(), box.extent().y(), box.extent().z()});
    const double step = span > 0.0 ? span / kLattice : 1.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      for (int a = 0; a < 3; ++a)
        q_[i][a] = std::llround((points[i][a] - box.lo[a]) / step);
  }

  /// Sign of the oriented volume of (a, b, c, p).
  int orient(std::size_t a, std::size_t b, std::size_t c, std::size_t p) const {
    using I = __int128;
    const auto& A = q_[a];
    I u[3], v[3], w[3];
    for (int k = 0; k < 3; ++k) {
      u[k] = q_[b][k] - A[k];
      v[k] = q_[c][k] - A[k];
      w[k] = q_[p][k] - A[k];
    }
    const I det = w[0] * (u[1] * v[2] - u[2] * v[1]) - w[1] * (u[0] * v[2] - u[2] * v[0]) +
                  w[2] * (u[0] * v[1] - u[1] * v[0]);
    return det > 0 ? 1 : (det < 0 ? -1 : 0);
  }

  void run(std::array<std::size_t, 4> seed) {
    const std::array<std::array<std::size_t, 4>, 4> tet = {{
        {seed[0], seed[1], seed[2], seed[3]},
        {seed[0], seed[3], seed[1], seed[2]},
        {seed[1], seed[3], seed[2], seed[0]},
        {seed[2], seed[3], seed[0], seed[1]},
    }};
    for (auto t : tet) {
      std::array<std::size_t, 3> f = {t[0], t[1], t[2]};
      if (orient(f[0], f[1], f[2], t[3]) > 0) std::swap(f[1], f[2]);
      add_face(f);
    }

    std::vector<std::size_t> all(pts_.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> fresh = {0, 1, 2, 3};
    assign(all, fresh, seed);

    std::vector<std::size_t> work;
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (!faces_[f].outside.empty()) work.push_back(f);

    while (!work.empty()) {
      const std::size_t f = work.back();
      work.pop_back();
      if (!faces_[f].alive || faces_[f].outside.empty()) continue;
      expand(f, work);
    }
  }

  double area() const {
    double a = 0.0;
    for (const auto& f : faces_)
      if (f.alive)
        a += 0.5 * (pts_[f.v[1]] - pts_[f.v[0]]).cross(pts_[f.v[2]] - pts_[f.v[0]]).norm();
    return a;
  }

  void export_to(ConvexHull& hull) const {
    std::unordered_set<std::size_t> verts;
    for (const auto& f : faces_) {
      if (!f.alive) continue;
      hull.faces.push_back(f.v);
      verts.insert(f.v.begin(), f.v.end());
    }
    hull.vertices.assign(verts.begin(), verts.end());
    std::sort(hull.vertices.begin(), hull.vertices.end());
  }

 private:
  struct Face {
    std::array<std::size_t, 3> v;
    Vec3 normal;
    double offset = 0.0;
    std::vector<std::size_t> outside;
    bool alive = true;
    std::size_t stamp = 0;
  };

  static std::uint64_t edge_key(std::size_t a, std::size_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }

  bool above(const Face& f, std::size_t p) const { return orient(f.v[0], f.v[1], f.v[2], p) > 0; }

  double distance(const Face& f, std::size_t p) const {
    return f.normal.dot(pts_[p]) - f.offset;
  }

  std::size_t add_face(const std::array<std::size_t, 3>& v) {
    Face f;
    f.v = v;
    const Vec3 n = (pts_[v[1]] - pts_[v[0]]).cross(pts_[v[2]] - pts_[v[0]]);
    const double len = n.norm();
    f.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    f.offset = f.normal.dot(pts_[v[0]]);
    const std::size_t id = faces_.size();
    faces_.push_back(std::move(f));
    for (int k = 0; k < 3; ++k) edges_[edge_key(v[k], v[(k + 1) % 3])] = id;
    return id;
  }

  // Moves each candidate point onto the outside set of the facet it is
  // farthest above, if it is above any.
  void assign(const std::vector<std::size_t>& candidates, const std::vector<std::size_t>& faces,
              std::span<const std::size_t> skip) {
    for (std::size_t p : candidates) {
      if (std::find(skip.begin(), skip.end(), p) != skip.end()) continue;
      double best = -kInf;
      std::size_t best_face = faces_.size();
      for (std::size_t f : faces) {
        if (!above(faces_[f], p)) continue;
        const double d = distance(faces_[f], p);
        if (d > best) {
          best = d;
          best_face = f;
        }
      }
      if (best_face < faces_.size()) faces_[best_face].outside.push_back(p);
    }
  }

  void expand(std::size_t start, std::vector<std::size_t>& work) {
    Face& seed_face = faces_[start];
    std::size_t apex = seed_face.outside.front();
    double far = distance(seed_face, apex);
    for (std::size_t p : seed_face.outside) {
      const double d = distance(seed_face, p);
      if (d > far) {
        far = d;
        apex = p;
      }
    }

    // Flood the set of facets visible from the apex.
    ++stamp_;
    std::vector<std::size_t> visible{start};
    faces_[start].stamp = stamp_;
    for (std::size_t i = 0; i < visible.size(); ++i) {
      const Face& f = faces_[visible[i]];
      for (int k = 0; k < 3; ++k) {
        const auto it = edges_.find(edge_key(f.v[(k + 1) % 3], f.v[k]));
        if (it == edges_.end()) continue;
        Face& g = faces_[it->second];
        if (g.stamp == stamp_ || !g.alive) continue;
        if (above(g, apex)) {
          g.stamp = stamp_;
          visible.push_back(it->second);
        }
      }
    }

    std::vector<std::pair<std::size_t, std::size_t>> horizon;
    std::vector<std::size_t> orphans;
    for (std::size_t fi : visible) {
      const Face& f = faces_[fi];
      for (int k = 0; k < 3; ++k) {
        const std::size_t a = f.v[k];
        const std::size_t b = f.v[(k + 1) % 3];
        const auto it = edges_.find(edge_key(b, a));
        if (it == edges_.end() || faces_[it->second].stamp != stamp_) horizon.push_back({a, b});
      }
      orphans.insert(orphans.end(), f.outside.begin(), f.outside.end());
    }
    for (std::size_t fi : visible) {
      Face& f = faces_[fi];
      f.alive = false;
      f.outside.clear();
      f.outside.shrink_to_fit();
      for (int k = 0; k < 3; ++k) {
        const auto it = edges_.find(edge_key(f.v[k], f.v[(k + 1) % 3]));
        if (it != edges_.end() && it->second == fi) edges_.erase(it);
      }
    }

    std::vector<std::size_t> created;
    created.reserve(horizon.size());
    for (const auto& [a, b] : horizon) created.push_back(add_face({a, b, apex}));
    const std::array<std::size_t, 1> skip{apex};
    assign(orphans, created, skip);
    for (std::size_t f : created)
      if (!faces_[f].outside.empty()) work.push_back(f);
  }

  std::span<const Vec3> pts_;
  std::vector<std::array<std::int64_t, 3>> q_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, std::size_t> edges_;
  std::size_t stamp_ = 0;
};

}  // namespace

double polygon_hull_area(std::span<const Vec2> points, std::vector<std::size_t>* hull_out) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x() < points[b].x() ||
           (points[a].x() == points[b].x() && points[a].y() < points[b].y());
  });
  if (idx.size() < 3) {
    if (hull_out) *hull_out = idx;
    return 0.0;
  }
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i : idx) {
    while (k >= 2 && cross2(points[hull[k - 2]], points[hull[k - 1]], points[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  const std::size_t lower = k + 1;
  for (auto it = idx.rbegin() + 1; it != idx.rend(); ++it) {
    while (k >= lower && cross2(points[hull[k - 2]], points[hull[k - 1]], points[*it]) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& p = points[hull[i]];
    const Vec2& q = points[hull[(i + 1) % hull.size()]];
    area += p.x() * q.y() - q.x() * p.y();
  }
  if (hull_out) *hull_out = std::move(hull);
  return 0.5 * std::abs(area);
}

namespace {

// Coplanar input: both faces of the planar hull in the best-fit plane.
ConvexHull planar_hull(std::span<const Vec3> points) {
  ConvexHull hull;
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 u = eig.eigenvectors().col(2);
  const Vec3 v = eig.eigenvectors().col(1);
  std::vector<Vec2> flat;
  flat.reserve(points.size());
  for (const Vec3& p : points) flat.emplace_back((p - mean).dot(u), (p - mean).dot(v));
  hull.dimension = 2;
  hull.area = 2.0 * polygon_hull_area(flat, &hull.vertices);
  std::sort(hull.vertices.begin(), hull.vertices.end());
  return hull;
}

}  // namespace

ConvexHull convex_hull(std::span<const Vec3> points) {
  ConvexHull hull;
  if (points.empty()) return hull;
  if (points.size() < 3) {
    hull.vertices = {0};
    if (points.size() == 2 && points[0] != points[1]) {
      hull.vertices.push_back(1);
      hull.dimension = 1;
    }
    return hull;
  }

  Aabb box;
  for (const Vec3& p : points) box.extend(p);
  const double scale = std::max(box.extent().norm(), 1e-300);
  const double tol = kDegenerateTolerance * scale;

  // Seed: the most distant pair among the axis extremes.
  std::array<std::size_t, 6> extremes{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int axis = 0; axis < 3; ++axis) {
      if (points[i][axis] < points[extremes[2 * axis]][axis]) extremes[2 * axis] = i;
      if (points[i][axis] > points[extremes[2 * axis + 1]][axis]) extremes[2 * axis + 1] = i;
    }
  }
  std::size_t i0 = extremes[0], i1 = extremes[1];
  double best = -1.0;
  for (std::size_t a : extremes)
    for (std::size_t b : extremes)
      if (const double d = (points[a] - points[b]).squaredNorm(); d > best) {
        best = d;
        i0 = a;
        i1 = b;
      }
  if (std::sqrt(best) <= tol) {
    hull.vertices = {i0};
    return hull;
  }

  const Vec3 axis = (points[i1] - points[i0]).normalized();
  std::size_t i2 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - points[i0];
    const double dist = (d - d.dot(axis) * axis).norm();
    if (dist > best) {
      best = dist;
      i2 = i;
    }
  }
  if (best <= tol) {
    hull.dimension = 1;
    hull.vertices = {std::min(i0, i1), std::max(i0, i1)};
    return hull;
  }

  const Vec3 normal = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  std::size_t i3 = i0;
  best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dist = std::abs(normal.dot(points[i] - points[i0]));
    if (dist > best) {
      best = dist;
      i3 = i;
    }
  }

  if (best <= tol) return planar_hull(points);

  QuickHull qh(points, box);
  if (qh.orient(i0, i1, i2, i3) == 0) return planar_hull(points);
  qh.run({i0, i1, i2, i3});
  hull.dimension = 3;
  hull.area = qh.area();
  qh.export_to(hull);
  return hull;
}

double hull_area(std::span<const Vec3> points) { return convex_hull(points).area; }

}  // namespace forge
