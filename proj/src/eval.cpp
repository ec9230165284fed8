#include "forge/eval.h"

#include "forge/parallel.h"

#include <unordered_map>

namespace forge {

double spl_value(int success, double shortest_path, double agent_path) {
  if (success == 0) return 0.0;
  const double denom = std::max(shortest_path, agent_path);
  if (denom <= 0.0) return 1.0;
  return shortest_path / denom;
}

double distance_to_viewpoints(const Episode& episode, const Vec3& position) {
  double best = kInf;
  const Vec2 p = horizontal(position);
  for (const auto& v : episode.viewpoints) best = std::min(best, (horizontal(v.position) - p).norm());
  return best;
}

EvalResult score_episode(const Episode& episode, const AgentState& state) {
  if (!std::isfinite(episode.geodesic_distance) || episode.geodesic_distance < 0.0)
    throw ValidationError("eval: episode " + episode.episode_id + " has no reachable viewpoint");
  EvalResult r;
  r.episode_id = episode.episode_id;
  r.distance_to_goal_at_end = distance_to_viewpoints(episode, state.position);
  r.success = state.called_stop && r.distance_to_goal_at_end < kSuccessDistance ? 1 : 0;
  r.shortest_path = episode.geodesic_distance;
  r.agent_path = state.path_length;
  r.spl = spl_value(r.success, r.shortest_path, r.agent_path);
  r.steps = state.steps;
  return r;
}

Trajectory simulate_actions(const Episode& episode, const Simulator& sim,
                            const std::vector<Action>& actions) {
  Trajectory t;
  t.episode_id = episode.episode_id;
  AgentState s = sim.reset(episode.start);
  for (Action a : actions) {
    if (s.done) break;
    s = sim.step(s, a).state;
    t.actions.push_back(a);
    t.path.push_back({s.position, s.heading});
  }
  t.ended_with_stop = s.called_stop;
  return t;
}

EvalResult evaluate(const Trajectory& trajectory, const Episode& episode, const Simulator& sim) {
  if (trajectory.episode_id != episode.episode_id)
    throw ValidationError("eval: trajectory for " + trajectory.episode_id + " scored against " +
                          episode.episode_id);
  AgentState s = sim.reset(episode.start);
  std::size_t consumed = 0;
  for (Action a : trajectory.actions) {
    if (s.done) break;
    s = sim.step(s, a).state;
    if (!trajectory.path.empty()) {
      if (consumed >= trajectory.path.size())
        throw ValidationError("eval: recorded path shorter than the action list");
      const Pose& rec = trajectory.path[consumed];
      if ((rec.position - s.position).norm() > 1e-9 ||
          std::abs(wrap_angle(rec.heading - s.heading + kPi) - kPi) > 1e-9)
        throw ValidationError("eval: recorded path of " + trajectory.episode_id +
                              " disagrees with re-simulation at step " +
                              std::to_string(consumed + 1));
    }
    ++consumed;
  }
  if (!trajectory.path.empty() && trajectory.path.size() != consumed)
    throw ValidationError("eval: recorded path length does not match the simulated steps");
  return score_episode(episode, s);
}

BatchReport batch_evaluate(const EpisodeDataset& dataset, const std::vector<Trajectory>& trajectories,
                           const Simulator& sim) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.episodes.size(); ++i)
    index.emplace(dataset.episodes[i].episode_id, i);
  std::vector<const Trajectory*> assigned(dataset.episodes.size(), nullptr);
  for (const auto& t : trajectories) {
    const auto it = index.find(t.episode_id);
    if (it == index.end()) throw ValidationError("eval: unknown episode " + t.episode_id);
    if (assigned[it->second]) throw ValidationError("eval: duplicate trajectory for " + t.episode_id);
    assigned[it->second] = &t;
  }

  BatchReport report;
  report.episodes = dataset.episodes.size();
  report.results.resize(dataset.episodes.size());
  parallel_for(dataset.episodes.size(), [&](std::size_t i) {
    const Episode& e = dataset.episodes[i];
    if (assigned[i]) {
      report.results[i] = evaluate(*assigned[i], e, sim);
    } else {
      EvalResult r = score_episode(e, sim.reset(e.start));
      report.results[i] = r;
    }
  });

  for (std::size_t i = 0; i < dataset.episodes.size(); ++i) {
    if (!assigned[i]) ++report.missing;
    const auto& r = report.results[i];
    auto& c = report.categories[dataset.episodes[i].object_category];
    ++c.episodes;
    c.success += r.success;
    c.spl += r.spl;
    report.success += r.success;
    report.spl += r.spl;
  }
  if (report.episodes > 0) {
    report.success /= static_cast<double>(report.episodes);
    report.spl /= static_cast<double>(report.episodes);
  }
  for (auto& [_, c] : report.categories) {
    c.success /= static_cast<double>(c.episodes);
    c.spl /= static_cast<double>(c.episodes);
  }
  return report;
}

}  // namespace forge
