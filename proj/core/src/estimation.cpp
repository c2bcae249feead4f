#include "hytop/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace hytop {

namespace {

constexpr double kMembershipSlack = 1e-9;

UncertaintyRegion make_base(const PeerReport& report, const TrackingPolicy& policy, double now,
                            const DynamicsParams& dyn) {
  if (now < report.timestamp) throw std::invalid_argument("region: report is newer than the query time");
  UncertaintyRegion r;
  r.node = report.node;
  r.basis_time = now;
  r.reported_position = report.position;
  r.report_age = now - report.timestamp;
  r.nominal = predict_nominal(report.position, report.timestamp, now, policy);
  r.bound_radius = error_bound(r.report_age, dyn.lambda, dyn.d_max);
  return r;
}

bool near_any(const Vec& x, const std::vector<Vec>& points, double radius) {
  const double r2 = radius * radius + kMembershipSlack;
  for (const Vec& p : points)
    if ((x - p).squaredNorm() <= r2) return true;
  return false;
}

}  // namespace

double UncertaintyRegion::spread() const {
  double s = 0.0;
  for (const Vec& p : particles) s = std::max(s, (p - nominal).norm());
  return s;
}

bool UncertaintyRegion::within_bound(double slack) const {
  if (particles.empty()) return false;
  return spread() <= bound_radius + slack;
}

UncertaintyRegion region_one_hop(const PeerReport& report, const TrackingPolicy& peer_policy,
                                 const Vec& receiver_position, double now, const ChannelModel& channel,
                                 const DynamicsParams& dynamics, const EstimationParams& params, Rng& rng) {
  UncertaintyRegion r = make_base(report, peer_policy, now, dynamics);
  const double delay_radius = channel.speed * r.report_age;
  const double eps = r.bound_radius;
  const double gap = (r.nominal - receiver_position).norm();

  // No disturbance or no elapsed time: the prediction is exact.
  if (eps == 0.0) {
    if (r.report_age > 0.0 && gap > delay_radius + kMembershipSlack)
      throw InconsistentRegionError("one-hop region: exact prediction lies outside the delay ball");
    r.particles.assign(1, r.nominal);
    return r;
  }
  if (gap > delay_radius + eps) throw InconsistentRegionError("one-hop region: disjoint balls");

  const int dim = dynamics.dimension;
  const std::size_t want = params.particles;
  r.particles.reserve(want);
  if (gap + eps <= delay_radius) {
    // Bound ball inside the delay ball.
    for (std::size_t k = 0; k < want; ++k) r.particles.push_back(sample_in_ball(r.nominal, eps, dim, rng));
    return r;
  }
  const bool bound_smaller = eps <= delay_radius;
  const Vec& c = bound_smaller ? r.nominal : receiver_position;
  const double rad = bound_smaller ? eps : delay_radius;
  const Vec& other_c = bound_smaller ? receiver_position : r.nominal;
  const double other_r2 = (bound_smaller ? delay_radius * delay_radius : eps * eps) + kMembershipSlack;
  const std::size_t max_attempts = want * params.attempts_per_particle;
  for (std::size_t a = 0; a < max_attempts && r.particles.size() < want; ++a) {
    Vec x = sample_in_ball(c, rad, dim, rng);
    if ((x - other_c).squaredNorm() <= other_r2) r.particles.push_back(x);
  }
  if (r.particles.empty()) throw InconsistentRegionError("one-hop region: no particle in the intersection");
  return r;
}

UncertaintyRegion extend_region(const UncertaintyRegion& predecessor, double hop_delay, const PeerReport& report,
                                const TrackingPolicy& peer_policy, double now, const ChannelModel& channel,
                                const DynamicsParams& dynamics, const EstimationParams& params, Rng& rng) {
  if (predecessor.particles.empty()) throw InconsistentRegionError("relay region: empty predecessor");
  if (hop_delay < 0.0) throw std::invalid_argument("relay region: negative hop delay");
  UncertaintyRegion r = make_base(report, peer_policy, now, dynamics);
  const double dilation = channel.speed * hop_delay;
  const double eps = r.bound_radius;
  const std::vector<Vec>& pred = predecessor.particles;

  if (eps == 0.0) {
    if (hop_delay > 0.0 && !near_any(r.nominal, pred, dilation))
      throw InconsistentRegionError("relay region: exact prediction outside the dilated region");
    r.particles.assign(1, r.nominal);
    return r;
  }
  if (!near_any(r.nominal, pred, dilation + eps)) throw InconsistentRegionError("relay region: disjoint sets");

  const int dim = dynamics.dimension;
  const std::size_t want = params.particles;
  const std::size_t max_attempts = want * params.attempts_per_particle;
  r.particles.reserve(want);
  const double eps2 = eps * eps + kMembershipSlack;
  std::uniform_int_distribution<std::size_t> pick(0, pred.size() - 1);
  for (std::size_t a = 0; a < max_attempts && r.particles.size() < want; ++a) {
    if (eps <= dilation) {
      Vec x = sample_in_ball(r.nominal, eps, dim, rng);
      if (near_any(x, pred, dilation)) r.particles.push_back(x);
    } else {
      Vec x = sample_in_ball(pred[pick(rng)], dilation, dim, rng);
      if ((x - r.nominal).squaredNorm() <= eps2) r.particles.push_back(x);
    }
  }
  if (r.particles.empty()) throw InconsistentRegionError("relay region: no particle in the intersection");
  return r;
}

UncertaintyRegion region_multi_hop(const Vec& receiver_position, std::span<const RelayHop> hops, double now,
                                   const ChannelModel& channel, const DynamicsParams& dynamics,
                                   const EstimationParams& params, Rng& rng) {
  if (hops.size() < 2) throw std::invalid_argument("region_multi_hop: chain needs at least two relayed nodes");
  UncertaintyRegion r =
      region_one_hop(hops[0].report, hops[0].policy, receiver_position, now, channel, dynamics, params, rng);
  for (std::size_t k = 1; k < hops.size(); ++k)
    r = extend_region(r, hops[k].hop_delay, hops[k].report, hops[k].policy, now, channel, dynamics, params, rng);
  return r;
}

std::vector<UncertaintyRegion> shrink_by_connectivity(std::vector<UncertaintyRegion> regions,
                                                      std::span<const Edge> edges, double range, int iterations) {
  std::vector<std::vector<NodeId>> adj(regions.size());
  for (const Edge& e : edges) {
    if (e.v >= regions.size()) throw std::out_of_range("shrink_by_connectivity: edge endpoint out of range");
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (NodeId i = 0; i < regions.size(); ++i) {
      auto& pts = regions[i].particles;
      const std::size_t before = pts.size();
      std::erase_if(pts, [&](const Vec& p) {
        for (NodeId j : adj[i])
          if (!near_any(p, regions[j].particles, range)) return true;
        return false;
      });
      if (pts.empty()) throw InconsistentRegionError("shrink_by_connectivity: region emptied");
      changed = changed || pts.size() != before;
    }
    if (!changed) break;
  }
  return regions;
}

DistanceDistribution distance_distribution(const UncertaintyRegion& a, const UncertaintyRegion& b,
                                           std::size_t pair_budget, Rng& rng) {
  if (a.particles.empty() || b.particles.empty())
    throw std::invalid_argument("distance_distribution: empty region");
  DistanceDistribution dd;
  dd.i = a.node;
  dd.j = b.node;
  const std::size_t na = a.particles.size(), nb = b.particles.size();
  if (na * nb <= pair_budget) {
    dd.samples.reserve(na * nb);
    for (const Vec& p : a.particles)
      for (const Vec& q : b.particles) dd.samples.push_back((p - q).norm());
    return dd;
  }
  dd.samples.reserve(pair_budget);
  std::uniform_int_distribution<std::size_t> ia(0, na - 1), ib(0, nb - 1);
  for (std::size_t k = 0; k < pair_budget; ++k)
    dd.samples.push_back((a.particles[ia(rng)] - b.particles[ib(rng)]).norm());
  return dd;
}

double risk_score(const DistanceDistribution& dd, double alpha, double range) {
  std::size_t in_range = 0, stretched = 0;
  const double cut = alpha * range;
  for (double d : dd.samples) {
    if (d > range) continue;
    ++in_range;
    if (d > cut) ++stretched;
  }
  if (in_range == 0) return 1.0;
  return static_cast<double>(stretched) / static_cast<double>(in_range);
}

double cost_estimate(const DistanceDistribution& dd, double rho_m, double c_max, double range) {
  return c_max * range * (1.0 - rho_m) * risk_score(dd, rho_m, range);
}

double confidence_score(const DistanceDistribution& dd, double rho_m, double range) {
  if (dd.samples.empty()) return 0.0;
  const double cut = rho_m * range;
  const auto close = std::count_if(dd.samples.begin(), dd.samples.end(), [&](double d) { return d < cut; });
  return static_cast<double>(close) / static_cast<double>(dd.samples.size());
}

double true_edge_cost(double separation, double rho_m, double c_max, double range) {
  if (separation <= rho_m * range) return 0.0;
  if (separation <= range) return c_max * (separation - rho_m * range);
  return kInfiniteCost;
}

std::vector<UncertaintyRegion> estimate_regions(const KnowledgeBase& kb, const Vec& observer_position, double now,
                                                const PolicyLookup& policies, const ChannelModel& channel,
                                                const DynamicsParams& dynamics, const EstimationParams& params,
                                                std::uint64_t seed, RegionEstimateStats* stats) {
  const std::size_t n = kb.size();
  const NodeId self = kb.owner();
  std::vector<UncertaintyRegion> out(n);
  enum class State : char { Todo, Busy, Done };
  std::vector<State> state(n, State::Todo);
  RegionEstimateStats local;

  auto report_of = [&](NodeId m) {
    const KnowledgeEntry& e = kb.entry(m);
    return PeerReport{m, e.position, std::min(e.timestamp, now)};
  };

  auto bound_ball_only = [&](NodeId m, Rng& rng) {
    const KnowledgeEntry& e = kb.entry(m);
    UncertaintyRegion r = make_base(report_of(m), policies(m, e), now, dynamics);
    if (r.bound_radius == 0.0) {
      r.particles.assign(1, r.nominal);
    } else {
      r.particles.reserve(params.particles);
      for (std::size_t k = 0; k < params.particles; ++k)
        r.particles.push_back(sample_in_ball(r.nominal, r.bound_radius, dynamics.dimension, rng));
    }
    return r;
  };

  auto compute = [&](auto&& self_ref, NodeId m) -> void {
    if (state[m] == State::Done) return;
    state[m] = State::Busy;
    Rng rng(derive_seed(seed, {m}));
    const KnowledgeEntry& e = kb.entry(m);
    UncertaintyRegion r;
    if (m == self) {
      r.node = m;
      r.basis_time = now;
      r.reported_position = r.nominal = observer_position;
      r.particles.assign(1, observer_position);
    } else if (!e.known) {
      throw std::logic_error("estimate_regions: no knowledge of node");
    } else {
      const NodeId hop = e.first_hop;
      const bool relayed = e.hops >= 2 && hop != self && hop != m && hop < n && kb.entry(hop).known &&
                           state[hop] != State::Busy;
      try {
        if (relayed) {
          self_ref(self_ref, hop);
          r = extend_region(out[hop], e.first_hop_delay, report_of(m), policies(m, e), now, channel, dynamics,
                            params, rng);
          ++local.multi_hop;
        } else {
          r = region_one_hop(report_of(m), policies(m, e), observer_position, now, channel, dynamics, params, rng);
        }
      } catch (const InconsistentRegionError&) {
        ++local.fallbacks;
        r = bound_ball_only(m, rng);
      }
    }
    out[m] = std::move(r);
    state[m] = State::Done;
  };
  for (NodeId m = 0; m < n; ++m) compute(compute, m);
  if (stats) {
    stats->multi_hop += local.multi_hop;
    stats->fallbacks += local.fallbacks;
  }
  return out;
}

}  // namespace hytop
