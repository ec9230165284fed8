#include "forge/serialization.h"

#include <fstream>
#include <sstream>

namespace forge {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      f(line);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

// Narrow wrapper so schema errors surface as forge::ParseError.
template <typename T>
T field(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
  for (const auto& x : j)
    if (!x.is_number()) throw ParseError("expected numbers in a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const PinholeCamera& c) {
  return {{"position", to_json(c.position)}, {"yaw", c.yaw},     {"pitch", c.pitch},
          {"hfov", c.hfov},                  {"width", c.width}, {"height", c.height}};
}

PinholeCamera camera_from_json(const Json& j) {
  PinholeCamera c;
  c.position = vec3_from_json(j.at("position"));
  c.yaw = field<double>(j, "yaw");
  c.pitch = field<double>(j, "pitch");
  c.hfov = field<double>(j, "hfov");
  c.width = field<int>(j, "width");
  c.height = field<int>(j, "height");
  c.validate();
  return c;
}

Json to_json(const Pose& p) { return {{"position", to_json(p.position)}, {"heading", p.heading}}; }

Pose pose_from_json(const Json& j) {
  return {vec3_from_json(j.at("position")), field<double>(j, "heading")};
}

Json to_json(const ImageGoal& g) {
  return {{"object_id", g.object_id},
          {"category", g.category},
          {"camera", to_json(g.camera)},
          {"c_f", g.frame_coverage},
          {"c_o", g.object_coverage},
          {"osa", g.osa}};
}

ImageGoal goal_from_json(const Json& j) {
  ImageGoal g;
  g.object_id = field<InstanceId>(j, "object_id");
  g.category = field<std::string>(j, "category");
  g.camera = camera_from_json(j.at("camera"));
  g.frame_coverage = field<double>(j, "c_f");
  g.object_coverage = field<double>(j, "c_o");
  g.osa = field<double>(j, "osa");
  return g;
}

Json to_json(const Episode& e) {
  Json vps = Json::array();
  for (const auto& v : e.viewpoints) vps.push_back(to_json(v.position));
  return {{"episode_id", e.episode_id},
          {"scene_id", e.scene_id},
          {"start", to_json(e.start)},
          {"goal", to_json(e.goal)},
          {"goal_index", e.goal_index},
          {"object_category", e.object_category},
          {"geodesic_distance", e.geodesic_distance},
          {"euclidean_distance", e.euclidean_distance},
          {"nearest_viewpoint", e.nearest_viewpoint},
          {"viewpoints", vps}};
}

Episode episode_from_json(const Json& j) {
  Episode e;
  e.episode_id = field<std::string>(j, "episode_id");
  e.scene_id = field<std::string>(j, "scene_id");
  e.start = pose_from_json(j.at("start"));
  e.goal = goal_from_json(j.at("goal"));
  e.goal_index = field<std::size_t>(j, "goal_index");
  e.object_category = field<std::string>(j, "object_category");
  e.geodesic_distance = field<double>(j, "geodesic_distance");
  e.euclidean_distance = field<double>(j, "euclidean_distance");
  e.nearest_viewpoint = field<std::size_t>(j, "nearest_viewpoint");
  for (const auto& v : j.at("viewpoints")) e.viewpoints.push_back({vec3_from_json(v), e.goal.object_id});
  return e;
}

std::string episode_to_json_line(const Episode& episode) { return to_json(episode).dump(); }

Episode episode_from_json_line(std::string_view line) {
  return episode_from_json(parse_json(line));
}

std::string goal_to_json_line(const ImageGoal& goal) { return to_json(goal).dump(); }

ImageGoal goal_from_json_line(std::string_view line) { return goal_from_json(parse_json(line)); }

void write_goals(const std::vector<ImageGoal>& goals, const std::filesystem::path& path) {
  std::string text;
  for (const auto& g : goals) text += goal_to_json_line(g) + "\n";
  write_text(path, text);
}

std::vector<ImageGoal> read_goals(const std::filesystem::path& path) {
  std::vector<ImageGoal> goals;
  for_each_line(path, [&](const std::string& line) { goals.push_back(goal_from_json_line(line)); });
  return goals;
}

Json manifest_json(const EpisodeDataset& ds) {
  const Provenance& p = ds.provenance;
  Json skipped = Json::array();
  for (const auto& s : p.skipped) skipped.push_back({{"object_id", s.object_id}, {"reason", s.reason}});
  return {{"schema_version", kDatasetSchemaVersion},
          {"split", ds.split},
          {"scene_id", ds.scene_id},
          {"scene_path", ds.scene_path},
          {"episodes_file", "episodes.jsonl"},
          {"episode_count", ds.episodes.size()},
          {"provenance",
           {{"seed", p.seed},
            {"starts_per_instance", p.starts_per_instance},
            {"max_retries", p.max_retries},
            {"min_ratio", p.min_ratio},
            {"thresholds",
             {{"c_o_min", p.thresholds.object_coverage_min},
              {"slope", p.thresholds.slope},
              {"intercept", p.thresholds.intercept}}},
            {"cell_size", p.cell_size},
            {"tool_version", p.tool_version},
            {"skipped", skipped}}}};
}

void write_dataset(const EpisodeDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "manifest.json", manifest_json(ds).dump(2) + "\n");
  std::string text;
  for (const auto& e : ds.episodes) text += episode_to_json_line(e) + "\n";
  write_text(dir / "episodes.jsonl", text);
}

EpisodeDataset read_dataset(const std::filesystem::path& dir) {
  const Json m = parse_json(read_text(dir / "manifest.json"));
  if (field<int>(m, "schema_version") != kDatasetSchemaVersion)
    throw ParseError("unsupported dataset schema version");
  EpisodeDataset ds;
  ds.split = field<std::string>(m, "split");
  ds.scene_id = field<std::string>(m, "scene_id");
  ds.scene_path = field<std::string>(m, "scene_path");
  const Json& p = m.at("provenance");
  ds.provenance.seed = field<std::uint64_t>(p, "seed");
  ds.provenance.starts_per_instance = field<std::size_t>(p, "starts_per_instance");
  ds.provenance.max_retries = field<int>(p, "max_retries");
  ds.provenance.min_ratio = field<double>(p, "min_ratio");
  const Json& t = p.at("thresholds");
  ds.provenance.thresholds = {field<double>(t, "c_o_min"), field<double>(t, "slope"),
                              field<double>(t, "intercept")};
  ds.provenance.cell_size = field<double>(p, "cell_size");
  ds.provenance.tool_version = field<std::string>(p, "tool_version");
  for (const auto& s : p.at("skipped"))
    ds.provenance.skipped.push_back({field<InstanceId>(s, "object_id"), field<std::string>(s, "reason")});
  for_each_line(dir / field<std::string>(m, "episodes_file"),
                [&](const std::string& line) { ds.episodes.push_back(episode_from_json_line(line)); });
  if (ds.episodes.size() != field<std::size_t>(m, "episode_count"))
    throw ParseError("episode count does not match the manifest");
  return ds;
}

Json to_json(const Trajectory& t) {
  Json actions = Json::array();
  for (Action a : t.actions) actions.push_back(std::string(to_string(a)));
  Json j = {{"episode_id", t.episode_id}, {"actions", actions}, {"ended_with_stop", t.ended_with_stop}};
  if (!t.path.empty()) {
    Json path = Json::array();
    for (const auto& p : t.path) path.push_back(to_json(p));
    j["path"] = path;
  }
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  Trajectory t;
  t.episode_id = field<std::string>(j, "episode_id");
  for (const auto& a : j.at("actions")) {
    if (!a.is_string()) throw ParseError("action must be a string");
    const auto action = parse_action(a.get<std::string>());
    if (!action) throw ParseError("unknown action '" + a.get<std::string>() + "'");
    t.actions.push_back(*action);
  }
  if (j.contains("path"))
    for (const auto& p : j.at("path")) t.path.push_back(pose_from_json(p));
  if (j.contains("ended_with_stop")) t.ended_with_stop = field<bool>(j, "ended_with_stop");
  return t;
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  std::vector<Trajectory> out;
  for_each_line(path, [&](const std::string& line) { out.push_back(trajectory_from_json(parse_json(line))); });
  return out;
}

void write_trajectories(const std::vector<Trajectory>& trajectories, const std::filesystem::path& path) {
  std::string text;
  for (const auto& t : trajectories) text += to_json(t).dump() + "\n";
  write_text(path, text);
}

Json to_json(const EvalResult& r) {
  return {{"episode_id", r.episode_id},
          {"success", r.success},
          {"spl", r.spl},
          {"shortest_path", r.shortest_path},
          {"agent_path", r.agent_path},
          {"distance_to_goal_at_end", r.distance_to_goal_at_end},
          {"steps", r.steps}};
}

EvalResult eval_result_from_json(const Json& j) {
  EvalResult r;
  r.episode_id = field<std::string>(j, "episode_id");
  r.success = field<int>(j, "success");
  r.spl = field<double>(j, "spl");
  r.shortest_path = field<double>(j, "shortest_path");
  r.agent_path = field<double>(j, "agent_path");
  r.distance_to_goal_at_end = field<double>(j, "distance_to_goal_at_end");
  r.steps = field<int>(j, "steps");
  return r;
}

Json to_json(const BatchReport& report) {
  Json categories = Json::object();
  for (const auto& [name, c] : report.categories)
    categories[name] = {{"episodes", c.episodes}, {"success", c.success}, {"spl", c.spl}};
  Json results = Json::array();
  for (const auto& r : report.results) results.push_back(to_json(r));
  return {{"episodes", report.episodes},
          {"missing", report.missing},
          {"success", report.success},
          {"spl", report.spl},
          {"categories", categories},
          {"results", results}};
}

const Episode* DatasetBundle::find(std::string_view episode_id) const {
  for (const auto& e : dataset.episodes)
    if (e.episode_id == episode_id) return &e;
  return nullptr;
}

void write_bundle(const EpisodeDataset& dataset, const Scene& scene, const OccupancyGrid& grid,
                  const std::filesystem::path& dir) {
  write_dataset(dataset, dir);
  save_scene(scene, dir / kSceneFile);
  save_grid(grid, dir / kGridFile);
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  DatasetBundle b;
  b.dataset = read_dataset(dir);
  b.scene = std::make_unique<Scene>(load_scene(dir / kSceneFile));
  b.grid = std::make_unique<OccupancyGrid>(load_grid(dir / kGridFile));
  return b;
}

}  // namespace forge
