#include "forge/coverage.h"
#include "forge/episodes.h"
#include "forge/eval.h"
#include "forge/image_io.h"
#include "forge/nav.h"
#include "forge/scene.h"
#include "forge/serialization.h"
#include "forge/service.h"

#include "CLI11.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace forge;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

// "x,y,z,yaw,pitch,hfov,WxH" with angles in degrees.
PinholeCamera parse_camera(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 7) throw ParseError("camera must be x,y,z,yaw,pitch,hfov,WxH");
  auto number = [](const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'");
    return v;
  };
  PinholeCamera c;
  c.position = {number(parts[0]), number(parts[1]), number(parts[2])};
  c.yaw = deg_to_rad(number(parts[3]));
  c.pitch = deg_to_rad(number(parts[4]));
  c.hfov = deg_to_rad(number(parts[5]));
  const auto x = parts[6].find('x');
  if (x == std::string::npos) throw ParseError("resolution must be WxH");
  c.width = static_cast<int>(number(parts[6].substr(0, x)));
  c.height = static_cast<int>(number(parts[6].substr(x + 1)));
  c.validate();
  return c;
}

std::vector<Action> read_actions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Action> actions;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = parse_json(line);
    const std::string name =
        j.is_string() ? j.get<std::string>() : j.at("action").get<std::string>();
    const auto a = parse_action(name);
    if (!a) throw ParseError("unknown action '" + name + "'");
    actions.push_back(*a);
  }
  return actions;
}

std::pair<std::string, std::uint16_t> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ParseError("bind must be HOST:PORT");
  int port = 0;
  const std::string p = bind.substr(colon + 1);
  const auto r = std::from_chars(p.data(), p.data() + p.size(), port);
  if (r.ec != std::errc() || port < 0 || port > 65535) throw ParseError("bad port '" + p + "'");
  return {bind.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance image-goal navigation benchmark toolkit"};
  app.require_subcommand(1);

  auto* scene_cmd = app.add_subcommand("scene", "Scene utilities");
  scene_cmd->require_subcommand(1);
  auto* gen = scene_cmd->add_subcommand("gen", "Generate a procedural multi-room scene");
  ProceduralSpec proc;
  std::string out;
  gen->add_option("--rooms", proc.rooms, "Number of rooms")->required();
  gen->add_option("--objects", proc.objects_per_room, "Objects per room")->required();
  gen->add_option("--seed", proc.seed, "Random seed")->required();
  gen->add_option("--out", out, "Scene file")->required();

  std::string scene_path;
  std::string camera_spec;
  auto* render_cmd = app.add_subcommand("render", "Render depth, instance mask and color");
  render_cmd->add_option("--scene", scene_path)->required();
  render_cmd->add_option("--camera", camera_spec, "x,y,z,yaw,pitch,hfov,WxH (degrees)")->required();
  render_cmd->add_option("--out", out, "Output prefix")->required();

  std::uint64_t seed = 0;
  auto* goals_cmd = app.add_subcommand("goals", "Generate image goals for every instance");
  goals_cmd->add_option("--scene", scene_path)->required();
  goals_cmd->add_option("--seed", seed)->required();
  goals_cmd->add_option("--out", out, "goals.jsonl")->required();

  double cell_size = 0.05;
  auto* nav_cmd = app.add_subcommand("nav", "Build the occupancy grid");
  nav_cmd->add_option("--scene", scene_path)->required();
  nav_cmd->add_option("--cell", cell_size, "Cell size in meters");
  nav_cmd->add_option("--out", out, "grid.bin")->required();

  InstanceId object_id = 0;
  auto* vp_cmd = app.add_subcommand("viewpoints", "List valid viewpoints of one object");
  vp_cmd->add_option("--scene", scene_path)->required();
  vp_cmd->add_option("--object", object_id)->required();
  vp_cmd->add_option("--out", out, "JSON file (default stdout)");

  DatasetConfig dataset_config;
  std::string goals_path;
  std::string scene_id;
  auto* gen_cmd = app.add_subcommand("generate", "Build an episode dataset");
  gen_cmd->add_option("--scene", scene_path)->required();
  gen_cmd->add_option("--seed", dataset_config.seed)->required();
  gen_cmd->add_option("--starts-per-instance", dataset_config.starts_per_instance);
  gen_cmd->add_option("--max-retries", dataset_config.max_retries);
  gen_cmd->add_option("--goals", goals_path, "Precomputed goals.jsonl");
  gen_cmd->add_option("--scene-id", scene_id, "Defaults to the scene file stem");
  gen_cmd->add_option("--out", out, "Dataset directory")->required();

  std::string dataset_dir;
  std::string csv_path;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--dataset", dataset_dir)->required();
  stats_cmd->add_option("--out", out, "stats.json")->required();
  stats_cmd->add_option("--csv", csv_path, "Histogram CSV");

  std::string traj_path;
  auto* eval_cmd = app.add_subcommand("eval", "Score trajectories");
  eval_cmd->add_option("--dataset", dataset_dir)->required();
  eval_cmd->add_option("--trajectories", traj_path)->required();
  eval_cmd->add_option("--out", out, "report.json")->required();

  std::string episode_id;
  std::string actions_path;
  auto* replay_cmd = app.add_subcommand("replay", "Replay an action list on one episode");
  replay_cmd->add_option("--dataset", dataset_dir)->required();
  replay_cmd->add_option("--episode", episode_id)->required();
  replay_cmd->add_option("--actions", actions_path, "One action per line")->required();
  replay_cmd->add_option("--out", out, "JSON file (default stdout)");

  auto* oracle_cmd = app.add_subcommand("oracle", "Shortest-path oracle trajectories");
  oracle_cmd->add_option("--dataset", dataset_dir)->required();
  oracle_cmd->add_option("--out", out, "traj.jsonl")->required();

  std::string bind = "127.0.0.1:5555";
  std::string results_path;
  bool no_render = false;
  int max_steps = 1000;
  bool allow_sliding = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the evaluation service");
  serve_cmd->add_option("--dataset", dataset_dir)->required();
  serve_cmd->add_option("--bind", bind, "HOST:PORT");
  serve_cmd->add_option("--results", results_path)->required();
  serve_cmd->add_flag("--no-render", no_render, "Omit RGBD from observations");
  for (auto* cmd : {serve_cmd, eval_cmd, replay_cmd, oracle_cmd}) {
    cmd->add_option("--max-steps", max_steps, "Episode step limit");
    cmd->add_flag("--allow-sliding", allow_sliding, "Slide along obstacles on blocked moves");
  }

  CLI11_PARSE(app, argc, argv);

  SimConfig sim_config;
  sim_config.max_steps = max_steps;
  sim_config.allow_sliding = allow_sliding;

  try {
    if (gen->parsed()) {
      save_scene(generate_procedural_scene(proc), out);
    } else if (render_cmd->parsed()) {
      const Scene scene = load_scene(scene_path);
      const Render r = render(scene, parse_camera(camera_spec));
      write_pfm(out + "_depth.pfm", r.depth, r.width, r.height);
      write_file(out + "_mask.png", encode_mask_png(r));
      write_file(out + "_rgb.png", encode_rgb_png(r));
    } else if (goals_cmd->parsed()) {
      const Scene scene = load_scene(scene_path);
      const auto goals = generate_goals(scene, seed);
      write_goals(goals, out);
      std::cerr << goals.size() << " goals for " << scene.instances().size() << " instances\n";
    } else if (nav_cmd->parsed()) {
      const Scene scene = load_scene(scene_path);
      OccupancyConfig oc;
      oc.cell_size = cell_size;
      const OccupancyGrid grid = build_occupancy(scene, AgentBody{}, oc);
      save_grid(grid, out);
      std::cerr << grid.free_count() << " of " << grid.cell_count() << " cells free\n";
    } else if (vp_cmd->parsed()) {
      const Scene scene = load_scene(scene_path);
      const ObjectInstance* object = scene.find(object_id);
      if (!object) throw ValidationError("no instance with id " + std::to_string(object_id));
      const OccupancyGrid grid = build_occupancy(scene, AgentBody{});
      Json list = Json::array();
      for (const auto& v : compute_viewpoints(scene, grid, *object, AgentBody{}))
        list.push_back(to_json(v.position));
      write_text(out.empty() ? "-" : out, list.dump(2) + "\n");
    } else if (gen_cmd->parsed()) {
      const Scene scene = load_scene(scene_path);
      const auto goals = goals_path.empty() ? generate_goals(scene, dataset_config.seed)
                                            : read_goals(goals_path);
      const OccupancyGrid grid = build_occupancy(scene, AgentBody{});
      if (scene_id.empty()) scene_id = std::filesystem::path(scene_path).stem().string();
      EpisodeDataset ds = generate_dataset(scene, scene_id, goals, grid, AgentBody{}, dataset_config);
      ds.scene_path = scene_path;
      for (const auto& s : ds.provenance.skipped)
        std::cerr << "skipped object " << s.object_id << ": " << s.reason << "\n";
      write_bundle(ds, scene, grid, out);
      std::cerr << ds.episodes.size() << " episodes written to " << out << "\n";
    } else if (stats_cmd->parsed()) {
      const DatasetStats stats = dataset_stats(read_dataset(dataset_dir));
      write_text(out, stats_to_json(stats));
      if (!csv_path.empty()) write_text(csv_path, stats_to_csv(stats));
    } else if (eval_cmd->parsed()) {
      const DatasetBundle b = load_bundle(dataset_dir);
      const Simulator sim(*b.scene, *b.grid, sim_config);
      const BatchReport report = batch_evaluate(b.dataset, read_trajectories(traj_path), sim);
      write_text(out, to_json(report).dump(2) + "\n");
      std::cerr << "success " << report.success << "  spl " << report.spl << "\n";
    } else if (replay_cmd->parsed()) {
      const DatasetBundle b = load_bundle(dataset_dir);
      const Episode* e = b.find(episode_id);
      if (!e) throw ValidationError("unknown episode " + episode_id);
      const Simulator sim(*b.scene, *b.grid, sim_config);
      const Trajectory t = simulate_actions(*e, sim, read_actions(actions_path));
      const Json j = {{"trajectory", to_json(t)}, {"result", to_json(evaluate(t, *e, sim))}};
      write_text(out.empty() ? "-" : out, j.dump(2) + "\n");
    } else if (oracle_cmd->parsed()) {
      const DatasetBundle b = load_bundle(dataset_dir);
      const Simulator sim(*b.scene, *b.grid, sim_config);
      std::vector<Trajectory> trajectories;
      for (const auto& e : b.dataset.episodes) trajectories.push_back(oracle_agent(e, sim));
      write_trajectories(trajectories, out);
    } else if (serve_cmd->parsed()) {
      const DatasetBundle b = load_bundle(dataset_dir);
      ResultsLog log(results_path);
      ServiceConfig config;
      config.sim = sim_config;
      config.observations = !no_render;
      const auto [host, port] = parse_bind(bind);
      std::atomic<std::uint16_t> bound{0};
      std::cerr << "serving " << b.dataset.episodes.size() << " episodes on " << bind << "\n";
      serve(b, host, port, &log, config, &bound);
    }
  } catch (const std::exception& e) {
    std::cerr << "forge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
