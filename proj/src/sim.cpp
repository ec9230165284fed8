#include "forge/sim.h"

namespace forge {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::MoveForward: return "MOVE_FORWARD";
    case Action::TurnLeft: return "TURN_LEFT";
    case Action::TurnRight: return "TURN_RIGHT";
    case Action::Stop: return "STOP";
  }
  return "STOP";
}

std::optional<Action> parse_action(std::string_view s) {
  if (s == "MOVE_FORWARD") return Action::MoveForward;
  if (s == "TURN_LEFT") return Action::TurnLeft;
  if (s == "TURN_RIGHT") return Action::TurnRight;
  if (s == "STOP") return Action::Stop;
  return std::nullopt;
}

Vec3 heading_direction(double heading) {
  return {-std::sin(heading), 0.0, -std::cos(heading)};
}

Simulator::Simulator(const Scene& scene, const OccupancyGrid& grid, SimConfig config)
    : scene_(&scene), grid_(&grid), config_(std::move(config)) {}

AgentState Simulator::reset(const Pose& start) const {
  const auto cell = grid_->cell_of(horizontal(start.position));
  if (!cell || !grid_->is_free(*cell))
    throw ValidationError("sim: episode start pose is not on a free cell");
  AgentState s;
  s.position = start.position;
  s.heading = wrap_angle(start.heading);
  s.start = {start.position, s.heading};
  return s;
}

bool Simulator::path_free(const Vec2& a, const Vec2& b) const {
  return segment_free(*grid_, a, b);
}

StepResult Simulator::step(const AgentState& state, Action action) const {
  StepResult r{state, state.done, false};
  if (state.done) return r;
  AgentState& s = r.state;
  ++s.steps;
  switch (action) {
    case Action::TurnLeft:
      s.heading = wrap_angle(s.heading + config_.turn_angle);
      break;
    case Action::TurnRight:
      s.heading = wrap_angle(s.heading - config_.turn_angle);
      break;
    case Action::Stop:
      s.done = true;
      s.called_stop = true;
      break;
    case Action::MoveForward: {
      const Vec2 from = horizontal(s.position);
      const Vec2 to = from + config_.forward_step * horizontal(heading_direction(s.heading));
      if (path_free(from, to)) {
        s.position.x() = to.x();
        s.position.z() = to.y();
        s.path_length += config_.forward_step;
      } else {
        r.collided = true;
        if (config_.allow_sliding) {
          // Farthest free point along the swept segment.
          const int n = 16;
          Vec2 best = from;
          for (int k = 1; k <= n; ++k) {
            const Vec2 p = from + (to - from) * (static_cast<double>(k) / n);
            if (!path_free(from, p)) break;
            best = p;
          }
          s.path_length += (best - from).norm();
          s.position.x() = best.x();
          s.position.z() = best.y();
        }
      }
      if (const auto cell = grid_->cell_of(horizontal(s.position)))
        s.position.y() = grid_->floor_y(*cell);
      break;
    }
  }
  if (!s.done && s.steps >= config_.max_steps) s.done = true;
  r.done = s.done;
  return r;
}

Vec2 Simulator::gps(const AgentState& state) const {
  const Vec3 d = state.position - state.start.position;
  // Rotate the world offset into the start frame (yaw by -start heading).
  const double c = std::cos(state.start.heading);
  const double s = std::sin(state.start.heading);
  // Adding +0.0 folds -0.0 to 0.0 so the start reads as exactly (0, 0).
  return {c * d.x() - s * d.z() + 0.0, s * d.x() + c * d.z() + 0.0};
}

double Simulator::compass(const AgentState& state) const {
  return wrap_angle(state.heading - state.start.heading);
}

Observation Simulator::observe(const AgentState& state) const {
  PinholeCamera cam;
  cam.position = state.position + Vec3(0.0, config_.sensor.height, 0.0);
  cam.yaw = state.heading;
  cam.pitch = 0.0;
  cam.hfov = config_.sensor.hfov;
  cam.width = config_.sensor.width;
  cam.height = config_.sensor.height_px;
  Observation obs;
  obs.rgbd = render(*scene_, cam);
  obs.gps = gps(state);
  obs.compass = compass(state);
  obs.sensor = config_.sensor;
  return obs;
}

}  // namespace forge
