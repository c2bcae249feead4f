#pragma once

// The central node's decision step: delete expensive edges that are not
// needed for connectivity, cost budget or the diameter bound (part A),
// propose new edges between confidently close pairs (part B) and hand the
// central role to the node of minimum eccentricity (part C). The
// DecisionProtocol carries a decision out over the network.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hytop/comms.hpp"
#include "hytop/estimation.hpp"
#include "hytop/graph.hpp"

namespace hytop {

/// C(t) = max(floor, c0 - slope * t).
struct BudgetFunction {
  double c0 = 1e9;
  double slope = 0.0;
  double floor = 0.0;

  double operator()(double t) const;
};

struct DecisionParams {
  Hops tau_d = 8;
  double c_bar = 2.0;
  BudgetFunction budget;
  double delta = 0.0;
  double p = 0.1;
  double rho_m = 0.6;
  double c_max = 1.0;
  double range = 10.0;
  double reserved_delta = 0.0;  // listed as an input of the procedure but never read
};

void validate(const DecisionParams& params);

/// Estimated cost for each base edge and confidence for each other pair.
class PairScores {
 public:
  PairScores() = default;
  explicit PairScores(std::size_t n) : n_(n), cost_(n * n, 0.0), confidence_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double cost(const Edge& e) const { return cost_[e.u * n_ + e.v]; }
  double confidence(const Edge& e) const { return confidence_[e.u * n_ + e.v]; }
  void set_cost(const Edge& e, double c) { cost_[e.u * n_ + e.v] = c; }
  void set_confidence(const Edge& e, double c) { confidence_[e.u * n_ + e.v] = c; }

 private:
  std::size_t n_ = 0;
  std::vector<double> cost_;
  std::vector<double> confidence_;
};

/// Scores every pair from its distance distribution; pair (i, j) uses its
/// own RNG stream derived from `seed`.
PairScores score_pairs(const Topology& base, std::span<const UncertaintyRegion> regions,
                       const DecisionParams& params, const EstimationParams& est, std::uint64_t seed);

double estimated_total_cost(const Topology& topo, const PairScores& scores);

struct PartAResult {
  EdgeList deleted;
  Topology remaining;
};

/// Greedy scan over base edges in ascending (u, v) order. An edge with
/// estimated cost >= c_bar is removed when the remaining graph keeps a
/// positive algebraic connectivity, its estimated cost is within
/// C(now) - delta and its diameter is within tau_d.
PartAResult part_a_delete(const Topology& base, const PairScores& scores, const DecisionParams& params,
                          double now);

/// Non-edges of `after_delete` whose confidence is at least 1 - p. Pairs in
/// `excluded` (this round's deletions) are never proposed.
EdgeList part_b_propose(const Topology& after_delete, const PairScores& scores, const DecisionParams& params,
                        std::span<const Edge> excluded = {});

/// Minimum-eccentricity node, lowest id on ties. Throws DisconnectedGraphError.
NodeId part_c_reelect(const Topology& topo);

/// Sum of true edge costs; kInfiniteCost if disconnected or an edge is out of range.
double total_cost(const Topology& topo, std::span<const Vec> positions, const DecisionParams& params);

struct DecisionRecord {
  std::uint64_t id = 0;
  double decision_time = 0.0;
  NodeId central = 0;
  EdgeList base;
  EdgeList deleted;
  EdgeList proposed;
  EdgeList confirmed;
  NodeId new_central = 0;
  double est_total_cost = 0.0;
  double compute_seconds = 0.0;
};

/// Parts A, B and C on one snapshot of regions. With `fixed_central` the
/// central role never moves.
DecisionRecord decide(NodeId central, const Topology& base, std::span<const UncertaintyRegion> regions,
                      const DecisionParams& params, const EstimationParams& est, double now, std::uint64_t seed,
                      bool fixed_central = false);

/// Message accounting for one decision, used to check the round structure.
struct RoundCounters {
  int aggregation_rounds = 1;  // the decision reads one knowledge snapshot
  int order_floods = 0;
  int confirm_floods = 0;
  int max_depth = 0;
  int confirmation_phases = 0;
  bool duplicate_confirm = false;
};

struct CommitResult {
  DecisionRecord record;
  Topology committed;
  bool timed_out = false;
  RoundCounters rounds;
};

/// Realized edges shared between the protocol and the physics.
class RealizedGraph {
 public:
  explicit RealizedGraph(std::size_t n = 0) : n_(n), adj_(n * n, 0) {}
  RealizedGraph(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return n_; }
  bool has(const Edge& e) const { return adj_[e.u * n_ + e.v] != 0; }
  void add(const Edge& e);
  void remove(const Edge& e);
  EdgeList edges() const;
  std::size_t edge_count() const { return count_; }
  Topology topology() const { return Topology(n_, edges()); }

 private:
  std::size_t n_;
  std::vector<char> adj_;
  std::size_t count_ = 0;
};

/// Dissemination of one decision at a time:
///  - the central floods an order over the communication graph;
///  - an endpoint of a deleted edge drops it on receipt;
///  - a proposed edge forms when its second endpoint receives the order and
///    the pair is truly within range; that endpoint floods a confirmation
///    (accepted or denied);
///  - the new central commits (base - deleted) + confirmed once every
///    proposal is answered or at the timeout. Late confirmations are
///    reported through take_late_confirmations().
class DecisionProtocol {
 public:
  explicit DecisionProtocol(std::size_t n) : n_(n), last_order_(n, 0) {}

  bool busy() const { return pending_.has_value(); }

  void issue(DecisionRecord record, double now, double timeout_at, Network& net, std::span<const Vec> positions,
             RealizedGraph& realized);

  /// Network control handler body.
  void on_control(NodeId receiver, const ControlPacket& packet, double time, Network& net,
                  std::span<const Vec> positions, RealizedGraph& realized);

  /// Commit due at time `now`, if any.
  std::optional<CommitResult> poll(double now);

  /// Accepted confirmations that arrived after their decision committed.
  std::vector<Edge> take_late_confirmations();

 private:
  void record_answer(std::uint64_t id, const Edge& e, bool accepted, NodeId at);

  // An order still spreading; outlives the commit of its decision.
  struct Flight {
    std::uint64_t id = 0;
    NodeId new_central = 0;
    EdgeList deleted;
    EdgeList proposed;
    std::vector<char> order_seen;
    std::vector<char> confirm_sent;  // per proposed edge
    std::size_t seen = 0;
  };
  struct Pending {
    DecisionRecord record;
    double timeout_at = 0.0;
    std::vector<char> answered;  // per proposed edge, at the new central
    std::size_t answers = 0;
    bool new_central_has_order = false;
    RoundCounters rounds;
  };

  std::size_t n_;
  std::optional<Pending> pending_;
  std::vector<Flight> flights_;
  std::vector<std::uint64_t> last_order_;  // per node, newest order id applied (0 = none)
  std::vector<std::uint64_t> committed_ids_;
  std::vector<Edge> late_;
};

}  // namespace hytop
