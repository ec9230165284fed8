#include "doctest.h"

#include "fixtures.h"
#include "oracles.h"

#include "forge/episodes.h"
#include "forge/serialization.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace forge;
using namespace forge::test;

namespace {

struct TwoRooms {
  Scene scene = two_rooms();
  OccupancyGrid grid = build_occupancy(scene, AgentBody{});
};

const TwoRooms& world() {
  static const TwoRooms w;
  return w;
}

std::string serialize(const EpisodeDataset& ds) {
  std::string out = manifest_json(ds).dump();
  for (const auto& e : ds.episodes) out += episode_to_json_line(e) + "\n";
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("round-robin goal allocation") {
  auto counts = [](std::size_t n, std::size_t g) {
    std::vector<int> c(g, 0);
    for (auto k : allocate_goals(n, g)) ++c[k];
    return c;
  };
  CHECK(counts(10, 3) == std::vector<int>{4, 3, 3});
  CHECK(counts(20, 10) == std::vector<int>(10, 2));
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t g = 1; g < 12; ++g) {
      const auto c = counts(n, g);
      CHECK(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()) <= 1);
    }
  }
}

TEST_CASE("accepted starts pass an independent re-check") {
  const auto& w = world();
  const ObjectInstance& chair = *w.scene.find(1);
  const auto vps = compute_viewpoints(w.scene, w.grid, chair, AgentBody{});
  REQUIRE_FALSE(vps.empty());
  const ViewpointField targets(w.grid, vps);
  Rng rng(21);
  int accepted = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto s = sample_start(w.grid, targets, rng);
    REQUIRE(s.has_value());
    ++accepted;
    const Vec2 p = horizontal(s->pose.position);
    CHECK(w.grid.is_free(p));
    CHECK(s->pose.heading >= 0.0);
    CHECK(s->pose.heading < kTwoPi);
    // Reference: every viewpoint is either in straight view (Euclidean) or
    // at its plain Dijkstra distance.
    const auto from = w.grid.cell_of(p);
    double best = kInf;
    for (const auto& v : vps) {
      const Vec2 q = horizontal(v.position);
      double d = kInf;
      if (segment_free(w.grid, p, q)) {
        d = (q - p).norm();
      } else if (k % 50 == 0) {  // the Dijkstra path is slow; subsample
        d = reference_dijkstra(w.grid, *from, *w.grid.snap(q, kSnapDistance)).value_or(kInf);
      } else {
        continue;
      }
      best = std::min(best, d);
    }
    const double euclid = (horizontal(vps[s->nearest_viewpoint].position) - p).norm();
    CHECK(s->euclidean_distance == doctest::Approx(euclid).epsilon(1e-12));
    CHECK(s->geodesic_distance / s->euclidean_distance > 1.05);
    CHECK(std::isfinite(s->geodesic_distance));
    // No straight-line viewpoint is closer than the reported geodesic.
    CHECK(best >= s->geodesic_distance - 1e-9);
  }
  CHECK(accepted == 1000);
}

TEST_CASE("starts with a straight view of a viewpoint are rejected") {
  // In an empty room every viewpoint is in straight view, so the ratio is 1.
  MeshBuilder m = room(3, 3);
  m.box({1.3, 0.0, 1.3}, {1.7, 0.5, 1.7}, 1, "plant");
  const Scene s = m.build();
  const OccupancyGrid g = build_occupancy(s, AgentBody{});
  const auto vps = compute_viewpoints(s, g, *s.find(1), AgentBody{});
  REQUIRE_FALSE(vps.empty());
  CHECK_FALSE(sample_start(g, vps, 3).has_value());
  const ViewpointField targets(g, vps);
  const auto at = geodesic_to_viewpoints(g, targets, horizontal(vps[0].position));
  REQUIRE(at);
  CHECK(at->distance == 0.0);
  CHECK_THROWS_AS(sample_start(g, std::vector<Viewpoint>{}, 3), ValidationError);
}

TEST_CASE("a start behind the wall needs the doorway") {
  const auto& w = world();
  const auto vps = compute_viewpoints(w.scene, w.grid, *w.scene.find(1), AgentBody{});
  const ViewpointField targets(w.grid, vps);
  const auto d = geodesic_to_viewpoints(w.grid, targets, Vec2(2.5, 0.5));
  REQUIRE(d);
  const double euclid = (horizontal(vps[d->viewpoint].position) - Vec2(2.5, 0.5)).norm();
  CHECK(d->distance / euclid > 1.05);
}

TEST_CASE("dataset generation: validity, balance, determinism") {
  const auto& w = world();
  const auto goals = stub_goals(w.scene, 3);
  DatasetConfig cfg;
  cfg.starts_per_instance = 10;
  cfg.seed = 5;
  const EpisodeDataset a = generate_dataset(w.scene, "two_rooms", goals, w.grid, AgentBody{}, cfg);
  const EpisodeDataset b = generate_dataset(w.scene, "two_rooms", goals, w.grid, AgentBody{}, cfg);
  CHECK(a.provenance.skipped.empty());
  REQUIRE(a.episodes.size() == 20);
  CHECK(serialize(a) == serialize(b));
  cfg.seed = 6;
  CHECK(serialize(generate_dataset(w.scene, "two_rooms", goals, w.grid, AgentBody{}, cfg)) != serialize(a));

  std::set<std::string> ids;
  std::map<std::pair<InstanceId, std::size_t>, int> per_goal;
  for (const auto& e : a.episodes) {
    CHECK(ids.insert(e.episode_id).second);
    CHECK(revalidate_episode(e, w.grid) == "");
    CHECK(e.object_category == w.scene.instance(e.goal.object_id).category);
    ++per_goal[{e.goal.object_id, e.goal_index}];
    // Frozen viewpoints equal a fresh computation.
    const auto fresh = compute_viewpoints(w.scene, w.grid, w.scene.instance(e.goal.object_id), AgentBody{});
    REQUIRE(fresh.size() == e.viewpoints.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) CHECK(fresh[i].position == e.viewpoints[i].position);
  }
  for (const auto& [_, n] : per_goal) CHECK((n == 4 || n == 3));
}

TEST_CASE("revalidation catches tampering") {
  const auto& w = world();
  DatasetConfig cfg;
  cfg.starts_per_instance = 2;
  EpisodeDataset ds = generate_dataset(w.scene, "s", stub_goals(w.scene, 1), w.grid, AgentBody{}, cfg);
  Episode e = ds.episodes.front();
  e.geodesic_distance *= 0.9;
  CHECK(revalidate_episode(e, w.grid) != "");
  e = ds.episodes.front();
  e.object_category = "tv";
  CHECK(revalidate_episode(e, w.grid) != "");
  e = ds.episodes.front();
  e.viewpoints.clear();
  CHECK(revalidate_episode(e, w.grid) != "");
}

TEST_CASE("unplaceable objects are skipped and recorded") {
  MeshBuilder m = room(3, 3);
  m.box({1.3, 0.0, 1.3}, {1.7, 0.5, 1.7}, 1, "plant");
  const Scene s = m.build();
  const OccupancyGrid g = build_occupancy(s, AgentBody{});
  DatasetConfig cfg;
  cfg.max_retries = 20;
  const EpisodeDataset ds = generate_dataset(s, "open", stub_goals(s, 2), g, AgentBody{}, cfg);
  CHECK(ds.episodes.empty());
  REQUIRE(ds.provenance.skipped.size() == 1);
  CHECK(ds.provenance.skipped[0].object_id == 1);
}

TEST_CASE("dataset files round trip") {
  const auto& w = world();
  DatasetConfig cfg;
  cfg.starts_per_instance = 4;
  EpisodeDataset ds = generate_dataset(w.scene, "two_rooms", stub_goals(w.scene, 2), w.grid, AgentBody{}, cfg);
  ds.scene_path = "two_rooms.txt";
  const auto dir = std::filesystem::temp_directory_path() / "forge_dataset_roundtrip";
  std::filesystem::remove_all(dir);
  write_bundle(ds, w.scene, w.grid, dir);
  const std::string first = read_file(dir / "episodes.jsonl");
  const DatasetBundle back = load_bundle(dir);
  CHECK(serialize(back.dataset) == serialize(ds));
  CHECK(*back.scene == w.scene);
  write_dataset(back.dataset, dir);
  CHECK(read_file(dir / "episodes.jsonl") == first);
  CHECK(back.find(ds.episodes[1].episode_id) != nullptr);
  CHECK(back.find("nope") == nullptr);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_dataset(dir), IoError);
}

TEST_CASE("malformed episode lines are parse errors") {
  CHECK_THROWS_AS(episode_from_json_line("{"), ParseError);
  CHECK_THROWS_AS(episode_from_json_line("{\"episode_id\": 3}"), ParseError);
  CHECK_THROWS_AS(goal_from_json_line("[]"), ParseError);
}

TEST_CASE("histograms") {
  const Histogram one = Histogram::build({2.3}, 0.5);
  CHECK(one.counts == std::vector<std::size_t>{1});
  CHECK(one.origin == 2.0);
  const Histogram h = Histogram::build({0.1, 0.4, 0.5, 1.74, 1.76}, 0.25);
  CHECK(h.origin == 0.0);
  CHECK(h.counts == std::vector<std::size_t>{1, 1, 1, 0, 0, 0, 1, 1});
  CHECK(Histogram::build({}, 1.0).counts.empty());
  CHECK_THROWS_AS(Histogram::build({1.0}, 0.0), ValidationError);
}

TEST_CASE("stats agree with a streaming re-count of the episode file") {
  const auto& w = world();
  DatasetConfig cfg;
  cfg.starts_per_instance = 15;
  const EpisodeDataset ds = generate_dataset(w.scene, "two_rooms", stub_goals(w.scene, 4), w.grid, AgentBody{}, cfg);
  const DatasetStats s = dataset_stats(ds);
  CHECK(s.episodes == ds.episodes.size());
  CHECK(s.ratio.min > 1.05);

  std::string text;
  for (const auto& e : ds.episodes) text += episode_to_json_line(e) + "\n";
  std::istringstream in(text);
  std::vector<std::size_t> geo(s.geodesic.counts.size(), 0), ratio(s.ratio.counts.size(), 0);
  std::map<std::string, std::size_t> per_category;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    const double g = j["geodesic_distance"].get<double>();
    const double e = j["euclidean_distance"].get<double>();
    ++geo[static_cast<std::size_t>((g - s.geodesic.origin) / 0.5)];
    ++ratio[static_cast<std::size_t>((g / e - s.ratio.origin) / 0.05)];
    ++per_category[j["object_category"].get<std::string>()];
  }
  CHECK(geo == s.geodesic.counts);
  CHECK(ratio == s.ratio.counts);
  for (const auto& [name, n] : per_category) {
    CHECK(s.categories.at(name).episodes == n);
    CHECK(s.categories.at(name).objects == 1);
    CHECK(s.categories.at(name).goals == 4);
  }
  const std::string csv = stats_to_csv(s);
  CHECK(csv.rfind("histogram,bin_lo,bin_hi,count\n", 0) == 0);
  const auto parsed = nlohmann::json::parse(stats_to_json(s));
  CHECK(parsed["histograms"]["ratio"]["min"].get<double>() > 1.05);
}
