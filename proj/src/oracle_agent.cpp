#include "forge/eval.h"

#include <algorithm>
#include <numbers>
#include <queue>
#include <unordered_map>

namespace forge {

namespace {

struct Node {
  AgentState state;
  int heading_index;  // turns relative to the start heading, mod 12
  std::int64_t parent;
  Action action;
  double g;
};

std::uint64_t pose_key(const Vec2& p, int heading_index, double quantum) {
  const auto qx = static_cast<std::int64_t>(std::llround(p.x() / quantum));
  const auto qz = static_cast<std::int64_t>(std::llround(p.y() / quantum));
  constexpr std::int64_t kOffset = std::int64_t{1} << 25;
  return (static_cast<std::uint64_t>(qx + kOffset) << 30) |
         (static_cast<std::uint64_t>(qz + kOffset) << 4) | static_cast<std::uint64_t>(heading_index);
}

}  // namespace

Trajectory oracle_agent(const Episode& episode, const Simulator& sim, const OracleConfig& config) {
  const OccupancyGrid& grid = sim.grid();
  const ViewpointField targets(grid, episode.viewpoints);
  const int headings = static_cast<int>(std::lround(kTwoPi / sim.config().turn_angle));
  const double goal_radius = kSuccessDistance - 1e-6;
  // 8-connected distances overestimate Euclidean length by at most this factor.
  const double octile_stretch = 1.0 / std::cos(kPi / 8.0);
  const double slack = goal_radius + grid.cell_size() * std::numbers::sqrt2;

  auto heuristic = [&](const Vec3& p) {
    const auto cell = grid.cell_of(horizontal(p));
    if (!cell) return kInf;
    const double d = targets.field.distance[*cell];
    if (!std::isfinite(d)) return kInf;
    return std::max(0.0, d / octile_stretch - slack);
  };

  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, double> best;
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const AgentState start = sim.reset(episode.start);
  nodes.push_back({start, 0, -1, Action::Stop, 0.0});
  best[pose_key(horizontal(start.position), 0, config.position_quantum)] = 0.0;
  open.emplace(heuristic(start.position), 0);

  std::int64_t goal = -1;
  std::size_t expansions = 0;
  while (!open.empty() && expansions < config.max_expansions) {
    const auto [f, id] = open.top();
    open.pop();
    const Node node = nodes[static_cast<std::size_t>(id)];
    const auto key = pose_key(horizontal(node.state.position), node.heading_index,
                              config.position_quantum);
    if (node.g > best[key]) continue;
    if (distance_to_viewpoints(episode, node.state.position) < goal_radius) {
      goal = id;
      break;
    }
    ++expansions;
    // Leave room for the final STOP within the step limit.
    if (node.state.steps + 1 >= sim.config().max_steps) continue;
    for (Action a : {Action::MoveForward, Action::TurnLeft, Action::TurnRight}) {
      const StepResult r = sim.step(node.state, a);
      if (r.collided && !sim.config().allow_sliding) continue;
      int h = node.heading_index;
      double cost = config.turn_cost;
      if (a == Action::TurnLeft) h = (h + 1) % headings;
      if (a == Action::TurnRight) h = (h + headings - 1) % headings;
      if (a == Action::MoveForward) cost = r.state.path_length - node.state.path_length;
      if (a == Action::MoveForward && cost <= 0.0) continue;
      const double g = node.g + cost;
      const auto k = pose_key(horizontal(r.state.position), h, config.position_quantum);
      const auto it = best.find(k);
      if (it != best.end() && it->second <= g) continue;
      const double hval = heuristic(r.state.position);
      if (!std::isfinite(hval)) continue;
      best[k] = g;
      nodes.push_back({r.state, h, id, a, g});
      open.emplace(g + hval, static_cast<std::int64_t>(nodes.size() - 1));
    }
  }
  if (goal < 0)
    throw InfeasibleError("oracle: no viewpoint reachable for episode " + episode.episode_id);

  std::vector<Action> actions;
  for (std::int64_t at = goal; nodes[static_cast<std::size_t>(at)].parent >= 0;
       at = nodes[static_cast<std::size_t>(at)].parent)
    actions.push_back(nodes[static_cast<std::size_t>(at)].action);
  std::reverse(actions.begin(), actions.end());
  actions.push_back(Action::Stop);
  return simulate_actions(episode, sim, actions);
}

}  // namespace forge
