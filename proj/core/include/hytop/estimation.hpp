#pragma once

// Set-valued position estimates for remote agents. A region is a particle
// cloud sampled uniformly from the intersection of a delay ball around the
// receiver (or the dilated region of the relaying node) and the ball of
// radius error_bound(report age) around the disturbance-free prediction.
// Distances between clouds feed the risk, confidence and cost scores.

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hytop/comms.hpp"
#include "hytop/dynamics.hpp"

namespace hytop {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct DynamicsParams {
  double lambda = 1.0;  // contraction rate, > 1/2
  double d_max = 0.0;   // disturbance bound, m/s
  int dimension = 2;
};

struct EstimationParams {
  std::size_t particles = 256;
  std::size_t pair_budget = 4096;
  int shrink_iterations = 5;
  std::size_t attempts_per_particle = 64;
};

struct PeerReport {
  NodeId node = 0;
  Vec position = Vec::Zero();
  double timestamp = 0.0;
};

struct UncertaintyRegion {
  NodeId node = 0;
  std::vector<Vec> particles;
  double basis_time = 0.0;
  Vec reported_position = Vec::Zero();
  double report_age = 0.0;
  Vec nominal = Vec::Zero();    // disturbance-free prediction at basis_time
  double bound_radius = 0.0;    // error_bound(report_age)

  /// Largest particle distance from the nominal prediction.
  double spread() const;
  bool within_bound(double slack = 1e-9) const;
};

struct DistanceDistribution {
  NodeId i = 0;
  NodeId j = 0;
  std::vector<double> samples;
};

/// The two regions share no point consistent with the model.
class InconsistentRegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Region of a direct neighbour: B(receiver, v * age) intersected with
/// B(nominal, error_bound(age)), age = now - report.timestamp.
UncertaintyRegion region_one_hop(const PeerReport& report, const TrackingPolicy& peer_policy,
                                 const Vec& receiver_position, double now, const ChannelModel& channel,
                                 const DynamicsParams& dynamics, const EstimationParams& params, Rng& rng);

/// One step of the relay recursion: the predecessor region dilated by
/// v * hop_delay, intersected with the bound ball of this node's report.
UncertaintyRegion extend_region(const UncertaintyRegion& predecessor, double hop_delay, const PeerReport& report,
                                const TrackingPolicy& peer_policy, double now, const ChannelModel& channel,
                                const DynamicsParams& dynamics, const EstimationParams& params, Rng& rng);

struct RelayHop {
  PeerReport report;
  TrackingPolicy policy;
  double hop_delay = 0.0;  // delay between this node and the previous one in the chain
};

/// Region of the last node of a relay chain receiver <- hops[0] <- ... <- hops.back().
/// hops[0] is a direct neighbour of the receiver. Requires hops.size() >= 2.
UncertaintyRegion region_multi_hop(const Vec& receiver_position, std::span<const RelayHop> hops, double now,
                                   const ChannelModel& channel, const DynamicsParams& dynamics,
                                   const EstimationParams& params, Rng& rng);

/// Drops particles of i with no particle of neighbour j within `range`,
/// for every edge, until nothing changes or `iterations` passes ran.
/// Throws InconsistentRegionError if a region empties.
std::vector<UncertaintyRegion> shrink_by_connectivity(std::vector<UncertaintyRegion> regions,
                                                      std::span<const Edge> edges, double range,
                                                      int iterations = 5);

/// Pairwise particle distances; all pairs when they fit the budget,
/// otherwise `pair_budget` uniformly random pairs.
DistanceDistribution distance_distribution(const UncertaintyRegion& a, const UncertaintyRegion& b,
                                           std::size_t pair_budget, Rng& rng);

/// |{alpha R < d <= R}| / |{d <= R}|; 1 when no sample is within range.
double risk_score(const DistanceDistribution& dd, double alpha, double range);
/// c_max * R * (1 - rho_m) * risk_score(rho_m).
double cost_estimate(const DistanceDistribution& dd, double rho_m, double c_max, double range);
/// |{d < rho_m R}| / |all samples|.
double confidence_score(const DistanceDistribution& dd, double rho_m, double range);
/// Distance cost of an existing edge; kInfiniteCost beyond range.
double true_edge_cost(double separation, double rho_m, double c_max, double range);

struct RegionEstimateStats {
  std::size_t multi_hop = 0;
  std::size_t fallbacks = 0;
  bool shrink_failed = false;
};

using PolicyLookup = std::function<TrackingPolicy(NodeId node, const KnowledgeEntry& entry)>;

/// Regions for every node as seen by `observer` from its knowledge base,
/// following each record's relay provenance. The observer's own region is
/// its exact position. Inconsistent intersections fall back to the bound
/// ball alone and are counted in `stats`.
std::vector<UncertaintyRegion> estimate_regions(const KnowledgeBase& kb, const Vec& observer_position, double now,
                                                const PolicyLookup& policies, const ChannelModel& channel,
                                                const DynamicsParams& dynamics, const EstimationParams& params,
                                                std::uint64_t seed, RegionEstimateStats* stats = nullptr);

}  // namespace hytop
