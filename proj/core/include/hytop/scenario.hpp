#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hytop/baselines.hpp"
#include "hytop/comms.hpp"
#include "hytop/decision.hpp"
#include "hytop/dynamics.hpp"
#include "hytop/estimation.hpp"

namespace hytop {

enum class MissionKind {
  Roam,      // each agent visits its own sequence of random waypoints in the arena
  Disperse,  // each agent heads away from the start centroid for goal_distance
  Static,    // references stay at the start positions
};

struct MissionParams {
  MissionKind kind = MissionKind::Roam;
  double speed = 1.0;          // reference speed, m/s
  double goal_distance = 40.0; // Disperse only, m
  std::size_t waypoints = 40;  // Roam only
  double arena_scale = 2.0;    // Roam arena side relative to the placement box
  // A reference stops advancing while one of the agent's realized links is
  // at least hold_fraction * R long, unless the step shortens that link.
  double hold_fraction = 0.9;
  bool tether = true;  // project realized links back to length <= R
};

struct Scenario {
  std::size_t nodes = 20;
  int dimension = 2;
  std::uint64_t seed = 1;
  std::size_t steps = 3000;
  double dt = 0.25;  // s per simulation step
  std::size_t cadence = 40;  // steps between decisions
  Method method = Method::Hybrid;

  ChannelModel channel;
  std::size_t truncate_k = 0;
  double drop_probability = 0.0;

  DynamicsParams dynamics{1.0, 0.3, 2};
  DisturbanceKind disturbance = DisturbanceKind::RandomWalk;
  double tracking_gain = 1.0;  // >= dynamics.lambda

  DecisionParams decision;
  EstimationParams estimation;
  bool shrink_regions = true;

  MissionParams mission;

  double box_side = 0.0;              // 0: 30 m * sqrt(nodes / 20)
  Hops placement_max_diameter = 0;    // 0: decision.tau_d
  std::size_t placement_attempts = 5000;

  double stressed_edge_line = 4.0;  // plot annotation only

  double resolved_box_side() const;
  Hops resolved_placement_diameter() const;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const Scenario& s);

/// Unknown keys are rejected; missing keys keep their defaults.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

std::string to_string(MissionKind k);
std::string to_string(DisturbanceKind k);

}  // namespace hytop
