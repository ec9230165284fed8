#include "doctest.h"

#include "fixtures.h"

#include "forge/sim.h"

using namespace forge;
using namespace forge::test;

namespace {

struct World {
  Scene scene;
  OccupancyGrid grid;
  World() : scene(room(4, 4).box({1.8, 0.0, 1.8}, {2.2, 0.9, 2.2}, 1, "chair").build()),
            grid(build_occupancy(scene, AgentBody{})) {}
};

const World& world() {
  static const World w;
  return w;
}

}  // namespace

TEST_CASE("reset places the agent at the start frame origin") {
  const Simulator sim(world().scene, world().grid);
  const Pose start{{1.0, 0.0, 1.0}, 1.0};
  const AgentState s = sim.reset(start);
  CHECK(sim.gps(s) == Vec2::Zero());
  CHECK(sim.compass(s) == 0.0);
  CHECK(s.steps == 0);
  CHECK_THROWS_AS(sim.reset(Pose{{2.0, 0.0, 2.0}, 0.0}), ValidationError);  // inside the chair
  CHECK_THROWS_AS(sim.reset(Pose{{-3.0, 0.0, 2.0}, 0.0}), ValidationError);
}

TEST_CASE("twelve turns return the heading") {
  const Simulator sim(world().scene, world().grid);
  for (double h0 : {0.0, 0.3, 2.0, 6.2}) {
    for (Action turn : {Action::TurnLeft, Action::TurnRight}) {
      AgentState s = sim.reset({{1.0, 0.0, 1.0}, h0});
      for (int i = 0; i < 12; ++i) {
        const auto r = sim.step(s, turn);
        CHECK(r.state.position == s.position);
        s = r.state;
      }
      CHECK(std::abs(wrap_angle(s.heading - wrap_angle(h0) + kPi) - kPi) < 1e-9);
      CHECK(std::abs(wrap_angle(sim.compass(s) + kPi) - kPi) < 1e-9);
    }
  }
}

TEST_CASE("turn direction and compass") {
  const Simulator sim(world().scene, world().grid);
  AgentState s = sim.reset({{1.0, 0.0, 1.0}, 0.0});
  s = sim.step(s, Action::TurnLeft).state;
  CHECK(sim.compass(s) == doctest::Approx(deg_to_rad(30)));
  s = sim.step(s, Action::TurnRight).state;
  s = sim.step(s, Action::TurnRight).state;
  CHECK(sim.compass(s) == doctest::Approx(deg_to_rad(330)));
}

TEST_CASE("four forward steps move exactly one meter") {
  const Simulator sim(world().scene, world().grid);
  for (double h0 : {0.0, kPi / 2, kPi, 0.7, 4.0}) {
    // Centered on open floor away from the chair and walls.
    const Vec3 start = Vec3(3.0, 0.0, 1.0) - 0.5 * heading_direction(h0);
    AgentState s = sim.reset({start, h0});
    for (int i = 0; i < 4; ++i) {
      const auto r = sim.step(s, Action::MoveForward);
      CHECK_FALSE(r.collided);
      s = r.state;
    }
    CHECK(std::abs(sim.gps(s).norm() - 1.0) < 1e-9);
    CHECK(s.path_length == 1.0);
    // Straight ahead in the start frame is -z.
    CHECK(std::abs(sim.gps(s).x()) < 1e-9);
    CHECK(sim.gps(s).y() == doctest::Approx(-1.0));
  }
}

TEST_CASE("blocked forward move leaves the agent in place") {
  const Simulator sim(world().scene, world().grid);
  // Facing the -x wall from 0.1 m beyond the body radius.
  AgentState s = sim.reset({{0.28, 0.0, 2.0}, kPi / 2});
  const auto r = sim.step(s, Action::MoveForward);
  CHECK(r.collided);
  CHECK(r.state.position == s.position);
  CHECK(r.state.path_length == 0.0);
  CHECK(r.state.steps == 1);

  SimConfig sliding;
  sliding.allow_sliding = true;
  const Simulator slide(world().scene, world().grid, sliding);
  const auto r2 = slide.step(slide.reset({{0.35, 0.0, 2.0}, kPi / 2}), Action::MoveForward);
  CHECK(r2.collided);
  CHECK(r2.state.position.x() < 0.35);
  CHECK(r2.state.path_length == doctest::Approx(0.35 - r2.state.position.x()));
}

TEST_CASE("random walks never enter blocked cells and account path length exactly") {
  const Simulator sim(world().scene, world().grid);
  Rng rng(12);
  const auto cells = world().grid.free_cells();
  for (int episode = 0; episode < 50; ++episode) {
    const Vec2 p = world().grid.center(cells[rng.below(cells.size())]);
    AgentState s = sim.reset({{p.x(), 0.0, p.y()}, rng.uniform(0.0, kTwoPi)});
    int forwards = 0;
    for (int k = 0; k < 200; ++k) {
      const Action a = static_cast<Action>(rng.below(3));
      const auto r = sim.step(s, a);
      if (a == Action::MoveForward && !r.collided) {
        ++forwards;
        CHECK((horizontal(r.state.position) - horizontal(s.position)).norm() ==
              doctest::Approx(0.25).epsilon(1e-12));
      }
      s = r.state;
      REQUIRE(world().grid.is_free(horizontal(s.position)));
      // gps is the start-frame rotation of the world offset.
      const Vec3 d = s.position - s.start.position;
      const Vec2 g = sim.gps(s);
      CHECK(g.norm() == doctest::Approx(horizontal(d).norm()).epsilon(1e-12));
      const Vec3 fwd = heading_direction(s.start.heading);
      CHECK(-g.y() == doctest::Approx(d.dot(fwd)).epsilon(1e-9));
    }
    CHECK(s.path_length == 0.25 * forwards);
  }
}

TEST_CASE("stop ends the episode; the step limit ends it without success") {
  SimConfig cfg;
  cfg.max_steps = 5;
  const Simulator sim(world().scene, world().grid, cfg);
  AgentState s = sim.reset({{1.0, 0.0, 1.0}, 0.0});
  const auto stop = sim.step(s, Action::Stop);
  CHECK(stop.done);
  CHECK(stop.state.called_stop);
  CHECK(stop.state.position == s.position);
  CHECK(sim.step(stop.state, Action::MoveForward).state.steps == stop.state.steps);
  for (int i = 0; i < 5; ++i) s = sim.step(s, Action::TurnLeft).state;
  CHECK(s.done);
  CHECK_FALSE(s.called_stop);
}

TEST_CASE("observations carry the sensor constants") {
  const Simulator sim(world().scene, world().grid);
  const AgentState s = sim.reset({{1.0, 0.0, 1.0}, 0.3});
  const Observation a = sim.observe(s);
  const Observation b = sim.observe(s);
  CHECK(a.sensor.height == 1.31);
  CHECK(a.sensor.hfov == deg_to_rad(58));
  CHECK(a.rgbd.width == 640);
  CHECK(a.rgbd.height == 480);
  CHECK(a.rgbd.depth == b.rgbd.depth);
  CHECK(a.rgbd.rgb == b.rgbd.rgb);
  // The center pixel looks horizontally from sensor height.
  const float center = a.rgbd.depth[a.rgbd.index(320, 240)];
  CHECK(std::isfinite(center));
  CHECK(parse_action("MOVE_FORWARD") == Action::MoveForward);
  CHECK_FALSE(parse_action("JUMP").has_value());
  CHECK(to_string(Action::TurnRight) == "TURN_RIGHT");
}
