#pragma once

// Closed-loop agent motion x' = F(x) + d(t, x) with a linear tracking
// policy F(x) = x_r'(t) + gain * (x_r(t) - x). For any two states a, b this
// gives (a - b)^T (F(a) - F(b)) = -gain * |a - b|^2, so the contraction
// condition holds with rate lambda whenever gain >= lambda.

#include <memory>
#include <stdexcept>
#include <vector>

#include "hytop/geometry.hpp"
#include "hytop/graph.hpp"

namespace hytop {

struct AgentState {
  NodeId id = 0;
  Vec x = Vec::Zero();
  double t = 0.0;
};

enum class DisturbanceKind { ConstantDirection, Sinusoidal, RandomWalk };

struct DisturbanceModel {
  double d_max = 0.0;  // m/s
  DisturbanceKind kind = DisturbanceKind::RandomWalk;
  int dimension = 2;
  double frequency = 0.05;  // Hz, sinusoidal kind
  double walk_rate = 0.5;   // fraction of d_max per sqrt(second), random walk
};

/// Seeded disturbance generator. Every sample has norm <= d_max.
class DisturbanceProcess {
 public:
  DisturbanceProcess(DisturbanceModel model, std::uint64_t seed);

  /// Draws the value held over the step that starts at time t.
  Vec sample(double t, double dt);
  const DisturbanceModel& model() const { return model_; }

 private:
  DisturbanceModel model_;
  Rng rng_;
  Vec direction_;
  Vec phase_;
  Vec walk_;
};

/// Piecewise-linear path parameterised by arc length.
class WaypointPath {
 public:
  explicit WaypointPath(std::vector<Vec> waypoints);

  double length() const { return cumulative_.back(); }
  Vec at(double s) const;
  /// Unit tangent of the segment containing s; zero past the end.
  Vec tangent(double s) const;
  const std::vector<Vec>& waypoints() const { return points_; }

 private:
  std::size_t segment(double s) const;

  std::vector<Vec> points_;
  std::vector<double> cumulative_;
};

/// x_r(t) = path(s0 + speed * rate * (t - t0)), held at the path end.
struct ReferenceTrajectory {
  std::shared_ptr<const WaypointPath> path;
  double speed = 0.0;  // m/s along the path
  double t0 = 0.0;
  double s0 = 0.0;
  double rate = 1.0;  // fraction of nominal speed, in [0, 1]

  double progress(double t) const;
  Vec position(double t) const;
  Vec velocity(double t) const;

  /// Same path and speed, restarted at progress s at time t with full rate.
  ReferenceTrajectory restarted(double t, double s) const;
};

struct TrackingPolicy {
  double gain = 1.0;  // 1/s, must be >= the contraction rate lambda
  ReferenceTrajectory reference;

  Vec closed_loop(const Vec& x, double t) const;
};

/// One fixed-step RK4 step of x' = F(x) + d with d drawn once and held.
/// Throws std::invalid_argument for dt <= 0, std::domain_error for a
/// non-finite state.
AgentState step(const AgentState& state, const TrackingPolicy& policy, DisturbanceProcess& disturbance, double dt);

/// Same step with a caller-provided held disturbance value.
AgentState step_with(const AgentState& state, const TrackingPolicy& policy, const Vec& disturbance, double dt);

/// Disturbance-free closed-loop solution from (x_known, t_known) to t_query.
/// Throws std::invalid_argument if t_query < t_known.
Vec predict_nominal(const Vec& x_known, double t_known, double t_query, const TrackingPolicy& policy,
                    double max_step = 0.05);

/// Deviation bound between nominal and perturbed solutions after
/// delta_t seconds: sqrt(2 (1 - exp(-(lambda - 1/2) delta_t)) / (2 lambda - 1)) * d_max.
/// Throws std::invalid_argument for lambda <= 1/2.
double error_bound(double delta_t, double lambda, double d_max);

/// Limit of error_bound as delta_t grows.
double error_bound_limit(double lambda, double d_max);

}  // namespace hytop
