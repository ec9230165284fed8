#pragma once

#include "forge/episodes.h"
#include "forge/sim.h"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forge {

inline constexpr double kSuccessDistance = 0.1;

struct Trajectory {
  std::string episode_id;
  std::vector<Action> actions;
  /// Pose after each action. May be empty; when present it must match a
  /// re-simulation of the actions.
  std::vector<Pose> path;
  bool ended_with_stop = false;
};

struct EvalResult {
  std::string episode_id;
  int success = 0;
  double spl = 0.0;
  double shortest_path = 0.0;
  double agent_path = 0.0;
  double distance_to_goal_at_end = 0.0;
  int steps = 0;

  bool operator==(const EvalResult&) const = default;
};

/// success * shortest / max(shortest, agent_path), with 0/0 read as 1.
double spl_value(int success, double shortest_path, double agent_path);

/// Horizontal distance from a point to the nearest of the episode's viewpoints.
double distance_to_viewpoints(const Episode& episode, const Vec3& position);

/// Scores a terminal agent state against the episode's frozen metadata.
EvalResult score_episode(const Episode& episode, const AgentState& final_state);

/// Re-simulates the trajectory from the episode start and scores it.
/// Throws ValidationError on a mismatched episode id, an unreachable
/// shortest path, or a recorded path that disagrees with re-simulation.
EvalResult evaluate(const Trajectory& trajectory, const Episode& episode, const Simulator& sim);

/// Runs the actions from the episode start and records the realized path.
Trajectory simulate_actions(const Episode& episode, const Simulator& sim,
                            const std::vector<Action>& actions);

struct CategoryReport {
  std::size_t episodes = 0;
  double success = 0.0;
  double spl = 0.0;
};

struct BatchReport {
  std::size_t episodes = 0;
  std::size_t missing = 0;
  double success = 0.0;
  double spl = 0.0;
  std::map<std::string, CategoryReport> categories;
  std::vector<EvalResult> results;  // dataset order
};

/// Missing trajectories count as failures; a duplicate trajectory for an
/// episode, or one naming an unknown episode, throws ValidationError.
BatchReport batch_evaluate(const EpisodeDataset& dataset, const std::vector<Trajectory>& trajectories,
                           const Simulator& sim);

struct OracleConfig {
  /// Positions closer than this are merged in the search.
  double position_quantum = 0.02;
  /// Added per turn so that equal-length plans prefer fewer turns.
  double turn_cost = 1e-3;
  std::size_t max_expansions = 2'000'000;
};

/// Shortest discrete-action plan (A* over quantized poses) from the episode
/// start to within the success radius of a viewpoint, ending with STOP.
/// Throws InfeasibleError when no viewpoint is reachable.
Trajectory oracle_agent(const Episode& episode, const Simulator& sim,
                        const OracleConfig& config = {});

}  // namespace forge
