#pragma once

#include "forge/nav.h"
#include "forge/render.h"
#include "forge/scene.h"

#include <optional>
#include <string>
#include <string_view>

namespace forge {

enum class Action { MoveForward, TurnLeft, TurnRight, Stop };

std::string_view to_string(Action a);
/// Accepts MOVE_FORWARD, TURN_LEFT, TURN_RIGHT, STOP.
std::optional<Action> parse_action(std::string_view s);

/// Forward-facing RGBD camera of the agent.
struct SensorSpec {
  double height = 1.31;
  double hfov = deg_to_rad(58.0);
  int width = 640;
  int height_px = 480;
};

struct SimConfig {
  double forward_step = 0.25;
  double turn_angle = deg_to_rad(30.0);
  int max_steps = 1000;
  /// On a blocked forward move, advance as far as the swept path allows
  /// instead of staying put.
  bool allow_sliding = false;
  AgentBody body;
  SensorSpec sensor;
};

struct AgentState {
  Vec3 position = Vec3::Zero();
  /// Yaw in [0, 2pi); 0 faces -z, positive turns left.
  double heading = 0.0;
  Pose start;
  int steps = 0;
  /// Total realized displacement.
  double path_length = 0.0;
  bool done = false;
  bool called_stop = false;
};

struct Observation {
  Render rgbd;  // rgb + depth (+ instance mask, not given to agents)
  /// Start-frame (x, z) offset: +x right of the start heading, -z ahead.
  Vec2 gps = Vec2::Zero();
  /// Heading relative to the start heading, in [0, 2pi).
  double compass = 0.0;
  SensorSpec sensor;
};

struct StepResult {
  AgentState state;
  bool done = false;
  /// A forward move was (at least partly) blocked.
  bool collided = false;
};

/// Unit forward vector on the floor plane for a heading.
Vec3 heading_direction(double heading);

/// Discrete-action simulator for a cylinder agent over an occupancy grid.
/// Holds references to an immutable scene and grid; each AgentState is an
/// independent episode session.
class Simulator {
 public:
  Simulator(const Scene& scene, const OccupancyGrid& grid, SimConfig config = {});

  /// Places the agent at the pose. Throws ValidationError when the pose's
  /// cell is not free.
  AgentState reset(const Pose& start) const;

  StepResult step(const AgentState& state, Action action) const;

  /// Renders the agent's RGBD view and GPS+Compass readings.
  Observation observe(const AgentState& state) const;

  Vec2 gps(const AgentState& state) const;
  double compass(const AgentState& state) const;

  /// Whether the straight move from a to b stays on free cells.
  bool path_free(const Vec2& a, const Vec2& b) const;

  const SimConfig& config() const { return config_; }
  const Scene& scene() const { return *scene_; }
  const OccupancyGrid& grid() const { return *grid_; }

 private:
  const Scene* scene_;
  const OccupancyGrid* grid_;
  SimConfig config_;
};

}  // namespace forge
