#include "hytop/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hytop {

using nlohmann::json;

double Scenario::resolved_box_side() const {
  return box_side > 0.0 ? box_side : 30.0 * std::sqrt(static_cast<double>(nodes) / 20.0);
}

Hops Scenario::resolved_placement_diameter() const {
  return placement_max_diameter > 0 ? placement_max_diameter : decision.tau_d;
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
  if (s.nodes == 0) fail("nodes must be positive");
  if (s.dimension != 2 && s.dimension != 3) fail("dimension must be 2 or 3");
  if (!(s.dt > 0.0)) fail("dt must be positive");
  if (s.cadence == 0) fail("cadence must be positive");
  if (!(s.channel.speed > 0.0)) fail("channel.speed must be positive");
  if (s.channel.max_message_length < 0.0) fail("channel.max_message_length must be non-negative");
  if (!(s.channel.range > 0.0)) fail("channel.range must be positive");
  if (s.drop_probability < 0.0 || s.drop_probability > 1.0) fail("channel.drop_probability must lie in [0, 1]");
  if (!(s.dynamics.lambda > 0.5)) fail("dynamics.lambda must exceed 0.5");
  if (s.dynamics.d_max < 0.0) fail("dynamics.d_max must be non-negative");
  if (s.tracking_gain < s.dynamics.lambda) fail("dynamics.tracking_gain must be at least lambda");
  if (s.dynamics.dimension != s.dimension) fail("dynamics dimension must match the scenario dimension");
  if (s.estimation.particles == 0) fail("estimation.particles must be positive");
  if (s.estimation.pair_budget == 0) fail("estimation.pair_budget must be positive");
  if (s.mission.speed < 0.0) fail("mission.speed must be non-negative");
  if (!(s.mission.hold_fraction > 0.0 && s.mission.hold_fraction <= 1.0)) fail("mission.hold_fraction must lie in (0, 1]");
  if (s.decision.range != s.channel.range) fail("decision range must equal channel.range");
  try {
    validate(s.decision);
  } catch (const std::invalid_argument& e) {
    fail(std::string("decision: ") + e.what());
  }
}

std::string to_string(MissionKind k) {
  switch (k) {
    case MissionKind::Roam: return "roam";
    case MissionKind::Disperse: return "disperse";
    case MissionKind::Static: return "static";
  }
  return "?";
}

std::string to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::ConstantDirection: return "constant";
    case DisturbanceKind::Sinusoidal: return "sinusoidal";
    case DisturbanceKind::RandomWalk: return "random-walk";
  }
  return "?";
}

namespace {

MissionKind parse_mission(const std::string& s) {
  if (s == "roam") return MissionKind::Roam;
  if (s == "disperse") return MissionKind::Disperse;
  if (s == "static") return MissionKind::Static;
  throw std::invalid_argument("scenario: unknown mission kind '" + s + "'");
}

DisturbanceKind parse_disturbance(const std::string& s) {
  if (s == "constant") return DisturbanceKind::ConstantDirection;
  if (s == "sinusoidal") return DisturbanceKind::Sinusoidal;
  if (s == "random-walk") return DisturbanceKind::RandomWalk;
  throw std::invalid_argument("scenario: unknown disturbance kind '" + s + "'");
}

void only_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw std::invalid_argument(std::string("scenario: '") + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument(std::string("scenario: unknown key '") + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: malformed JSON: ") + e.what());
  }
  Scenario s;
  try {
    only_keys(j, "scenario",
              {"nodes", "dimension", "seed", "steps", "dt", "cadence", "method", "channel", "dynamics", "decision",
               "estimation", "mission", "placement", "plot"});
    read(j, "nodes", s.nodes);
    read(j, "dimension", s.dimension);
    read(j, "seed", s.seed);
    read(j, "steps", s.steps);
    read(j, "dt", s.dt);
    read(j, "cadence", s.cadence);
    if (j.contains("method")) s.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("channel")) {
      const json& c = j.at("channel");
      only_keys(c, "channel", {"speed", "max_message_length", "range", "truncate_k", "drop_probability"});
      read(c, "speed", s.channel.speed);
      read(c, "max_message_length", s.channel.max_message_length);
      read(c, "range", s.channel.range);
      read(c, "truncate_k", s.truncate_k);
      read(c, "drop_probability", s.drop_probability);
    }
    if (j.contains("dynamics")) {
      const json& d = j.at("dynamics");
      only_keys(d, "dynamics", {"lambda", "d_max", "disturbance", "tracking_gain"});
      read(d, "lambda", s.dynamics.lambda);
      read(d, "d_max", s.dynamics.d_max);
      read(d, "tracking_gain", s.tracking_gain);
      if (d.contains("disturbance")) s.disturbance = parse_disturbance(d.at("disturbance").get<std::string>());
    }
    if (j.contains("decision")) {
      const json& d = j.at("decision");
      only_keys(d, "decision", {"tau_d", "c_bar", "budget", "delta", "p", "rho_m", "c_max", "reserved_delta"});
      read(d, "tau_d", s.decision.tau_d);
      read(d, "c_bar", s.decision.c_bar);
      read(d, "delta", s.decision.delta);
      read(d, "p", s.decision.p);
      read(d, "rho_m", s.decision.rho_m);
      read(d, "c_max", s.decision.c_max);
      read(d, "reserved_delta", s.decision.reserved_delta);
      if (d.contains("budget")) {
        const json& b = d.at("budget");
        only_keys(b, "decision.budget", {"c0", "slope", "floor"});
        read(b, "c0", s.decision.budget.c0);
        read(b, "slope", s.decision.budget.slope);
        read(b, "floor", s.decision.budget.floor);
      }
    }
    if (j.contains("estimation")) {
      const json& e = j.at("estimation");
      only_keys(e, "estimation", {"particles", "pair_budget", "shrink_iterations", "attempts_per_particle", "shrink"});
      read(e, "particles", s.estimation.particles);
      read(e, "pair_budget", s.estimation.pair_budget);
      read(e, "shrink_iterations", s.estimation.shrink_iterations);
      read(e, "attempts_per_particle", s.estimation.attempts_per_particle);
      read(e, "shrink", s.shrink_regions);
    }
    if (j.contains("mission")) {
      const json& m = j.at("mission");
      only_keys(m, "mission",
                {"kind", "speed", "goal_distance", "waypoints", "arena_scale", "hold_fraction", "tether"});
      if (m.contains("kind")) s.mission.kind = parse_mission(m.at("kind").get<std::string>());
      read(m, "speed", s.mission.speed);
      read(m, "goal_distance", s.mission.goal_distance);
      read(m, "waypoints", s.mission.waypoints);
      read(m, "arena_scale", s.mission.arena_scale);
      read(m, "hold_fraction", s.mission.hold_fraction);
      read(m, "tether", s.mission.tether);
    }
    if (j.contains("placement")) {
      const json& p = j.at("placement");
      only_keys(p, "placement", {"box_side", "max_diameter", "attempts"});
      read(p, "box_side", s.box_side);
      read(p, "max_diameter", s.placement_max_diameter);
      read(p, "attempts", s.placement_attempts);
    }
    if (j.contains("plot")) {
      const json& p = j.at("plot");
      only_keys(p, "plot", {"stressed_edge_line"});
      read(p, "stressed_edge_line", s.stressed_edge_line);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: bad field type: ") + e.what());
  }
  s.dynamics.dimension = s.dimension;
  s.decision.range = s.channel.range;
  validate(s);
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j{
      {"nodes", s.nodes},
      {"dimension", s.dimension},
      {"seed", s.seed},
      {"steps", s.steps},
      {"dt", s.dt},
      {"cadence", s.cadence},
      {"method", std::string(1, method_tag(s.method))},
      {"channel",
       {{"speed", s.channel.speed},
        {"max_message_length", s.channel.max_message_length},
        {"range", s.channel.range},
        {"truncate_k", s.truncate_k},
        {"drop_probability", s.drop_probability}}},
      {"dynamics",
       {{"lambda", s.dynamics.lambda},
        {"d_max", s.dynamics.d_max},
        {"disturbance", to_string(s.disturbance)},
        {"tracking_gain", s.tracking_gain}}},
      {"decision",
       {{"tau_d", s.decision.tau_d},
        {"c_bar", s.decision.c_bar},
        {"budget", {{"c0", s.decision.budget.c0}, {"slope", s.decision.budget.slope}, {"floor", s.decision.budget.floor}}},
        {"delta", s.decision.delta},
        {"p", s.decision.p},
        {"rho_m", s.decision.rho_m},
        {"c_max", s.decision.c_max},
        {"reserved_delta", s.decision.reserved_delta}}},
      {"estimation",
       {{"particles", s.estimation.particles},
        {"pair_budget", s.estimation.pair_budget},
        {"shrink_iterations", s.estimation.shrink_iterations},
        {"attempts_per_particle", s.estimation.attempts_per_particle},
        {"shrink", s.shrink_regions}}},
      {"mission",
       {{"kind", to_string(s.mission.kind)},
        {"speed", s.mission.speed},
        {"goal_distance", s.mission.goal_distance},
        {"waypoints", s.mission.waypoints},
        {"arena_scale", s.mission.arena_scale},
        {"hold_fraction", s.mission.hold_fraction},
        {"tether", s.mission.tether}}},
      {"placement",
       {{"box_side", s.box_side}, {"max_diameter", s.placement_max_diameter}, {"attempts", s.placement_attempts}}},
      {"plot", {{"stressed_edge_line", s.stressed_edge_line}}},
  };
  return j.dump(2);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return scenario_from_json(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace hytop
