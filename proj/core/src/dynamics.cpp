#include "hytop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hytop {

DisturbanceProcess::DisturbanceProcess(DisturbanceModel model, std::uint64_t seed)
    : model_(model), rng_(seed), direction_(Vec::Zero()), phase_(Vec::Zero()), walk_(Vec::Zero()) {
  if (model_.d_max < 0.0) throw std::invalid_argument("disturbance bound must be non-negative");
  if (model_.dimension != 2 && model_.dimension != 3) throw std::invalid_argument("dimension must be 2 or 3");
  direction_ = random_direction(model_.dimension, rng_);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < model_.dimension; ++k) phase_[k] = angle(rng_);
  walk_ = sample_in_ball(Vec::Zero(), model_.d_max, model_.dimension, rng_);
}

Vec DisturbanceProcess::sample(double t, double dt) {
  const double dm = model_.d_max;
  if (dm == 0.0) return Vec::Zero();
  switch (model_.kind) {
    case DisturbanceKind::ConstantDirection:
      return dm * direction_;
    case DisturbanceKind::Sinusoidal: {
      const double w = 2.0 * std::numbers::pi * model_.frequency;
      Vec d = Vec::Zero();
      for (int k = 0; k < model_.dimension; ++k) d[k] = std::sin(w * t + phase_[k]);
      return d * (dm / std::sqrt(static_cast<double>(model_.dimension)));
    }
    case DisturbanceKind::RandomWalk: {
      std::normal_distribution<double> normal(0.0, model_.walk_rate * dm * std::sqrt(std::max(dt, 0.0)));
      for (int k = 0; k < model_.dimension; ++k) walk_[k] += normal(rng_);
      const double n = walk_.norm();
      if (n > dm) walk_ *= dm / n;
      return walk_;
    }
  }
  return Vec::Zero();
}

WaypointPath::WaypointPath(std::vector<Vec> waypoints) : points_(std::move(waypoints)) {
  if (points_.empty()) throw std::invalid_argument("waypoint path needs at least one point");
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t k = 1; k < points_.size(); ++k)
    cumulative_.push_back(cumulative_.back() + (points_[k] - points_[k - 1]).norm());
}

std::size_t WaypointPath::segment(double s) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
  if (k == 0) return 0;
  return std::min(k - 1, points_.size() - 2);
}

Vec WaypointPath::at(double s) const {
  if (points_.size() == 1 || s <= 0.0) return points_.front();
  if (s >= length()) return points_.back();
  const std::size_t k = segment(s);
  const double seg = cumulative_[k + 1] - cumulative_[k];
  if (seg <= 0.0) return points_[k];
  const double f = (s - cumulative_[k]) / seg;
  return points_[k] + f * (points_[k + 1] - points_[k]);
}

Vec WaypointPath::tangent(double s) const {
  if (points_.size() == 1 || s >= length()) return Vec::Zero();
  const std::size_t k = segment(std::max(s, 0.0));
  Vec d = points_[k + 1] - points_[k];
  const double n = d.norm();
  return n > 0.0 ? Vec(d / n) : Vec(Vec::Zero());
}

double ReferenceTrajectory::progress(double t) const {
  const double s = s0 + speed * rate * (t - t0);
  return path ? std::clamp(s, 0.0, path->length()) : 0.0;
}

Vec ReferenceTrajectory::position(double t) const { return path ? path->at(progress(t)) : Vec(Vec::Zero()); }

Vec ReferenceTrajectory::velocity(double t) const {
  if (!path) return Vec::Zero();
  const double s = s0 + speed * rate * (t - t0);
  if (s >= path->length() || s < 0.0) return Vec::Zero();
  return path->tangent(s) * (speed * rate);
}

ReferenceTrajectory ReferenceTrajectory::restarted(double t, double s) const {
  ReferenceTrajectory r = *this;
  r.t0 = t;
  r.s0 = s;
  r.rate = 1.0;
  return r;
}

Vec TrackingPolicy::closed_loop(const Vec& x, double t) const {
  return reference.velocity(t) + gain * (reference.position(t) - x);
}

namespace {

Vec rk4(const Vec& x, double t, double dt, const TrackingPolicy& policy, const Vec& d) {
  const Vec k1 = policy.closed_loop(x, t) + d;
  const Vec k2 = policy.closed_loop(x + 0.5 * dt * k1, t + 0.5 * dt) + d;
  const Vec k3 = policy.closed_loop(x + 0.5 * dt * k2, t + 0.5 * dt) + d;
  const Vec k4 = policy.closed_loop(x + dt * k3, t + dt) + d;
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

AgentState step_with(const AgentState& state, const TrackingPolicy& policy, const Vec& disturbance, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (!state.x.allFinite()) throw std::domain_error("step: non-finite agent state");
  AgentState next = state;
  next.x = rk4(state.x, state.t, dt, policy, disturbance);
  next.t = state.t + dt;
  if (!next.x.allFinite()) throw std::domain_error("step: integration produced a non-finite state");
  return next;
}

AgentState step(const AgentState& state, const TrackingPolicy& policy, DisturbanceProcess& disturbance, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  return step_with(state, policy, disturbance.sample(state.t, dt), dt);
}

Vec predict_nominal(const Vec& x_known, double t_known, double t_query, const TrackingPolicy& policy,
                    double max_step) {
  if (t_query < t_known) throw std::invalid_argument("predict_nominal: query time precedes the known state");
  if (t_query == t_known) return x_known;
  const double span = t_query - t_known;
  const auto steps = static_cast<int>(std::ceil(span / max_step));
  const double h = span / steps;
  Vec x = x_known;
  const Vec zero = Vec::Zero();
  for (int k = 0; k < steps; ++k) x = rk4(x, t_known + k * h, h, policy, zero);
  return x;
}

double error_bound(double delta_t, double lambda, double d_max) {
  if (!(lambda > 0.5)) throw std::invalid_argument("error_bound: contraction rate must exceed 1/2");
  if (delta_t <= 0.0 || d_max == 0.0) return 0.0;
  const double a = lambda - 0.5;
  return std::sqrt(-2.0 * std::expm1(-a * delta_t) / (2.0 * lambda - 1.0)) * d_max;
}

double error_bound_limit(double lambda, double d_max) {
  if (!(lambda > 0.5)) throw std::invalid_argument("error_bound: contraction rate must exceed 1/2");
  return std::sqrt(2.0 / (2.0 * lambda - 1.0)) * d_max;
}

}  // namespace hytop
