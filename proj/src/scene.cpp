#include "forge/scene.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace forge {

namespace {

constexpr std::string_view kMagic = "forge-scene";
constexpr int kFormatVersion = 1;

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw ParseError("scene file: unexpected end of input");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    const auto tok = next();
    if (tok != word)
      throw ParseError("scene file: expected '" + std::string(word) + "', got '" +
                       std::string(tok) + "'");
  }

  template <typename T>
  T number() {
    const auto tok = next();
    T value{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      throw ParseError("scene file: bad number '" + std::string(tok) + "'");
    return value;
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Scene::Scene(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
             std::vector<InstanceId> triangle_instance, std::vector<Category> categories)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      triangle_instance_(std::move(triangle_instance)) {
  if (triangle_instance_.size() != triangles_.size())
    throw ValidationError("scene: label count does not match triangle count");
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite())
      throw ValidationError("scene: vertex " + std::to_string(i) + " is not finite");
    bounds_.extend(vertices_[i]);
  }
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (auto idx : triangles_[t]) {
      if (idx >= vertices_.size())
        throw ValidationError("scene: triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(idx) + " of " + std::to_string(vertices_.size()));
    }
  }

  std::sort(categories.begin(), categories.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
  std::map<InstanceId, std::size_t> slot;
  for (const auto& c : categories) {
    if (c.id == kStructureId) throw ValidationError("scene: instance id 0 is reserved");
    if (c.name.empty() ||
        std::any_of(c.name.begin(), c.name.end(),
                    [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); }))
      throw ValidationError("scene: category of instance " + std::to_string(c.id) +
                            " must be a non-empty token");
    if (!slot.emplace(c.id, instances_.size()).second)
      throw ValidationError("scene: duplicate instance id " + std::to_string(c.id));
    ObjectInstance inst;
    inst.id = c.id;
    inst.category = c.name;
    instances_.push_back(std::move(inst));
  }

  std::vector<double> area(instances_.size(), 0.0);
  std::vector<Vec3> weighted(instances_.size(), Vec3::Zero());
  std::vector<Vec3> vertex_sum(instances_.size(), Vec3::Zero());
  std::vector<std::size_t> tri_count(instances_.size(), 0);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const InstanceId id = triangle_instance_[t];
    if (id == kStructureId) continue;
    const auto it = slot.find(id);
    if (it == slot.end())
      throw ValidationError("scene: triangle " + std::to_string(t) +
                            " references unlisted instance " + std::to_string(id));
    const std::size_t k = it->second;
    const auto [a, b, c] = triangle_vertices(static_cast<std::uint32_t>(t));
    const double tri_area = 0.5 * (b - a).cross(c - a).norm();
    const Vec3 center = (a + b + c) / 3.0;
    area[k] += tri_area;
    weighted[k] += tri_area * center;
    vertex_sum[k] += center;
    ++tri_count[k];
    instances_[k].aabb.extend(a);
    instances_[k].aabb.extend(b);
    instances_[k].aabb.extend(c);
  }
  for (std::size_t k = 0; k < instances_.size(); ++k) {
    if (tri_count[k] == 0)
      throw ValidationError("scene: instance " + std::to_string(instances_[k].id) +
                            " has no labeled triangles");
    instances_[k].centroid = area[k] > 0.0 ? Vec3(weighted[k] / area[k])
                                           : Vec3(vertex_sum[k] / double(tri_count[k]));
    // Keep the centroid inside the box under rounding.
    instances_[k].centroid =
        instances_[k].centroid.cwiseMax(instances_[k].aabb.lo).cwiseMin(instances_[k].aabb.hi);
  }

  bvh_ = std::make_shared<const TriangleBvh>(vertices_, triangles_);
}

const ObjectInstance* Scene::find(InstanceId id) const {
  const auto it = std::lower_bound(instances_.begin(), instances_.end(), id,
                                   [](const ObjectInstance& o, InstanceId v) { return o.id < v; });
  if (it == instances_.end() || it->id != id) return nullptr;
  return &*it;
}

const ObjectInstance& Scene::instance(InstanceId id) const {
  const auto* inst = find(id);
  if (!inst) throw ValidationError("scene: no instance " + std::to_string(id));
  return *inst;
}

std::vector<std::uint32_t> Scene::triangles_of(InstanceId id) const {
  std::vector<std::uint32_t> out;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    if (triangle_instance_[t] == id) out.push_back(static_cast<std::uint32_t>(t));
  return out;
}

bool Scene::operator==(const Scene& other) const {
  if (vertices_.size() != other.vertices_.size() || instances_.size() != other.instances_.size())
    return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] != other.vertices_[i]) return false;
  for (std::size_t i = 0; i < instances_.size(); ++i)
    if (instances_[i].id != other.instances_[i].id ||
        instances_[i].category != other.instances_[i].category)
      return false;
  return triangles_ == other.triangles_ && triangle_instance_ == other.triangle_instance_;
}

std::string format_scene(const Scene& scene) {
  std::string out;
  out.reserve(64 * (scene.vertices().size() + scene.triangles().size()) + 256);
  out += kMagic;
  out += ' ';
  out += std::to_string(kFormatVersion);
  out += "\ninstances ";
  out += std::to_string(scene.instances().size());
  out += '\n';
  for (const auto& inst : scene.instances()) {
    out += std::to_string(inst.id);
    out += ' ';
    out += inst.category;
    out += '\n';
  }
  out += "vertices ";
  out += std::to_string(scene.vertices().size());
  out += '\n';
  for (const Vec3& v : scene.vertices()) {
    append_double(out, v.x());
    out += ' ';
    append_double(out, v.y());
    out += ' ';
    append_double(out, v.z());
    out += '\n';
  }
  out += "triangles ";
  out += std::to_string(scene.triangles().size());
  out += '\n';
  const auto labels = scene.triangle_instance();
  for (std::size_t t = 0; t < scene.triangles().size(); ++t) {
    const auto& tri = scene.triangles()[t];
    out += std::to_string(tri[0]) + ' ' + std::to_string(tri[1]) + ' ' + std::to_string(tri[2]) +
           ' ' + std::to_string(labels[t]) + '\n';
  }
  out += "end\n";
  return out;
}

Scene parse_scene(std::string_view text) {
  Tokenizer tok(text);
  tok.expect(kMagic);
  const int version = tok.number<int>();
  if (version != kFormatVersion)
    throw ParseError("scene file: unsupported format version " + std::to_string(version));

  tok.expect("instances");
  const auto n_inst = tok.number<std::size_t>();
  std::vector<Scene::Category> categories;
  for (std::size_t i = 0; i < n_inst; ++i) {
    const auto id = tok.number<InstanceId>();
    categories.push_back({id, std::string(tok.next())});
  }

  tok.expect("vertices");
  const auto n_vert = tok.number<std::size_t>();
  std::vector<Vec3> vertices(n_vert);
  for (auto& v : vertices) {
    const double x = tok.number<double>();
    const double y = tok.number<double>();
    const double z = tok.number<double>();
    v = {x, y, z};
  }

  tok.expect("triangles");
  const auto n_tri = tok.number<std::size_t>();
  std::vector<Triangle> triangles(n_tri);
  std::vector<InstanceId> labels(n_tri);
  for (std::size_t t = 0; t < n_tri; ++t) {
    for (auto& idx : triangles[t]) idx = tok.number<std::uint32_t>();
    labels[t] = tok.number<InstanceId>();
  }
  tok.expect("end");
  if (!tok.at_end()) throw ParseError("scene file: trailing data after 'end'");

  return Scene(std::move(vertices), std::move(triangles), std::move(labels),
               std::move(categories));
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write scene file " + path.string());
  const std::string text = format_scene(scene);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void append_box(const Aabb& box, InstanceId id, std::vector<Vec3>& vertices,
                std::vector<Triangle>& triangles, std::vector<InstanceId>& labels) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  for (int i = 0; i < 8; ++i) {
    vertices.emplace_back((i & 1) ? box.hi.x() : box.lo.x(), (i & 2) ? box.hi.y() : box.lo.y(),
                          (i & 4) ? box.hi.z() : box.lo.z());
  }
  // Outward-wound quads, two triangles each.
  static constexpr std::array<std::array<std::uint32_t, 4>, 6> kFaces = {{
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  }};
  for (const auto& f : kFaces) {
    triangles.push_back({base + f[0], base + f[1], base + f[2]});
    triangles.push_back({base + f[0], base + f[2], base + f[3]});
    labels.push_back(id);
    labels.push_back(id);
  }
}

}  // namespace forge
