#include "doctest.h"

#include "fixtures.h"

#include "forge/rng.h"

#include <filesystem>

using namespace forge;
using namespace forge::test;

TEST_CASE("derived instance data follows geometry") {
  MeshBuilder m = room(3, 3);
  m.box({1, 0, 1}, {1.5, 0.8, 1.4}, 4, "chair");
  const Scene s = m.build();
  REQUIRE(s.instances().size() == 1);
  const ObjectInstance& o = s.instances()[0];
  CHECK(o.id == 4);
  CHECK(o.category == "chair");
  CHECK((o.aabb.lo - Vec3(1, 0, 1)).norm() < 1e-15);
  CHECK((o.aabb.hi - Vec3(1.5, 0.8, 1.4)).norm() < 1e-15);
  CHECK((o.centroid - Vec3(1.25, 0.4, 1.2)).norm() < 1e-12);
  CHECK(s.triangles_of(4).size() == 12);
  CHECK(s.bounds().contains(o.aabb.lo));
}

TEST_CASE("scene validation errors") {
  MeshBuilder m;
  m.triangle({0, 0, 0}, {1, 0, 0}, {0, 0, 1});
  SUBCASE("dangling index") {
    m.triangles[0][2] = 9;
    CHECK_THROWS_AS(m.build(), ValidationError);
  }
  SUBCASE("unknown label") {
    m.labels[0] = 3;
    CHECK_THROWS_AS(m.build(), ValidationError);
  }
  SUBCASE("instance without triangles") {
    m.categories.push_back({2, "tv"});
    CHECK_THROWS_AS(m.build(), ValidationError);
  }
  SUBCASE("non-finite vertex") {
    m.vertices[1].x() = std::nan("");
    CHECK_THROWS_AS(m.build(), ValidationError);
  }
  SUBCASE("duplicate instance") {
    m.labels[0] = 1;
    m.categories = {{1, "tv"}, {1, "tv"}};
    CHECK_THROWS_AS(m.build(), ValidationError);
  }
}

TEST_CASE("scene text round trip is byte stable") {
  const Scene& s = four_rooms();
  const std::string text = format_scene(s);
  const Scene back = parse_scene(text);
  CHECK(back == s);
  CHECK(format_scene(back) == text);
  const auto path = std::filesystem::temp_directory_path() / "forge_scene_roundtrip.txt";
  save_scene(s, path);
  CHECK(load_scene(path) == s);
  std::filesystem::remove(path);
}

TEST_CASE("malformed scene files are parse errors") {
  CHECK_THROWS_AS(parse_scene(""), ParseError);
  CHECK_THROWS_AS(parse_scene("forge-scene 2\n"), ParseError);
  CHECK_THROWS_AS(parse_scene("forge-scene 1\ninstances 0\nvertices 1\n0 0\n"), ParseError);
  CHECK_THROWS_AS(load_scene("/nonexistent/scene.txt"), IoError);
}

TEST_CASE("procedural scenes are deterministic and well formed") {
  const Scene a = generate_procedural_scene({4, 2, 7});
  const Scene b = generate_procedural_scene({4, 2, 7});
  const Scene c = generate_procedural_scene({4, 2, 8});
  CHECK(format_scene(a) == format_scene(b));
  CHECK_FALSE(a == c);
  CHECK(a.instances().size() == 8);
  for (const auto& o : a.instances()) {
    CHECK(std::find(kCategories.begin(), kCategories.end(), o.category) != kCategories.end());
    CHECK(o.aabb.lo.y() >= 0.0);
  }
  // Objects do not overlap one another.
  const auto inst = a.instances();
  for (std::size_t i = 0; i < inst.size(); ++i)
    for (std::size_t j = i + 1; j < inst.size(); ++j) CHECK_FALSE(inst[i].aabb.overlaps(inst[j].aabb));
}

TEST_CASE("procedural scene property sweep") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int rooms = 1 + static_cast<int>(seed % 6);
    const Scene s = generate_procedural_scene({rooms, 2, seed});
    CHECK(s.instances().size() == static_cast<std::size_t>(2 * rooms));
    CHECK(s.bounds().lo.y() == doctest::Approx(-0.1));
  }
  CHECK_THROWS_AS(generate_procedural_scene({1, 40, 1}), InfeasibleError);
}

TEST_CASE("seed derivation and rng") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(fnv1a("abc") != fnv1a("abd"));
  Rng rng(42);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(2.0, 3.0);
    CHECK(u >= 2.0);
    CHECK(u < 3.0);
  }
}
