#include "hytop/decision.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace hytop {

double BudgetFunction::operator()(double t) const { return std::max(floor, c0 - slope * t); }

void validate(const DecisionParams& params) {
  if (params.tau_d < 1) throw std::invalid_argument("tau_d must be at least 1");
  if (!(params.p > 0.0 && params.p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (params.delta < 0.0) throw std::invalid_argument("delta must be non-negative");
  if (!(params.rho_m > 0.0 && params.rho_m < 1.0)) throw std::invalid_argument("rho_m must lie in (0, 1)");
  if (!(params.c_max > 0.0)) throw std::invalid_argument("c_max must be positive");
  if (!(params.range > 0.0)) throw std::invalid_argument("range must be positive");
  if (params.budget.slope < 0.0) throw std::invalid_argument("budget must be nonincreasing");
}

PairScores score_pairs(const Topology& base, std::span<const UncertaintyRegion> regions,
                       const DecisionParams& params, const EstimationParams& est, std::uint64_t seed) {
  const std::size_t n = base.size();
  if (regions.size() != n) throw std::invalid_argument("score_pairs: one region per node required");
  PairScores s(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const Edge e{i, j};
      Rng rng(derive_seed(seed, {i, j}));
      const DistanceDistribution dd = distance_distribution(regions[i], regions[j], est.pair_budget, rng);
      if (base.has_edge(i, j))
        s.set_cost(e, cost_estimate(dd, params.rho_m, params.c_max, params.range));
      else
        s.set_confidence(e, confidence_score(dd, params.rho_m, params.range));
    }
  }
  return s;
}

double estimated_total_cost(const Topology& topo, const PairScores& scores) {
  double c = 0.0;
  for (const Edge& e : topo.edges()) c += scores.cost(e);
  return c;
}

PartAResult part_a_delete(const Topology& base, const PairScores& scores, const DecisionParams& params,
                          double now) {
  PartAResult out{{}, base};
  const double allowance = params.budget(now) - params.delta;
  EdgeList candidates = base.edges();
  std::sort(candidates.begin(), candidates.end());
  for (const Edge& e : candidates) {
    if (scores.cost(e) < params.c_bar) continue;
    const Edge removed[] = {e};
    Topology tentative = decremental_update(out.remaining, removed, {});
    if (algebraic_connectivity(tentative) <= kConnectivityTolerance) continue;
    if (estimated_total_cost(tentative, scores) > allowance) continue;
    if (tentative.max_eccentricity() > params.tau_d) continue;
    out.remaining = std::move(tentative);
    out.deleted.push_back(e);
  }
  return out;
}

EdgeList part_b_propose(const Topology& after_delete, const PairScores& scores, const DecisionParams& params,
                        std::span<const Edge> excluded) {
  EdgeList out;
  const std::size_t n = after_delete.size();
  const double need = 1.0 - params.p;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const Edge e{i, j};
      if (after_delete.has_edge(i, j)) continue;
      if (std::find(excluded.begin(), excluded.end(), e) != excluded.end()) continue;
      if (scores.confidence(e) >= need) out.push_back(e);
    }
  }
  return out;
}

NodeId part_c_reelect(const Topology& topo) { return central_node(topo); }

double total_cost(const Topology& topo, std::span<const Vec> positions, const DecisionParams& params) {
  if (topo.size() > 1 && !is_connected(topo)) return kInfiniteCost;
  double c = 0.0;
  for (const Edge& e : topo.edges())
    c += true_edge_cost(distance(positions[e.u], positions[e.v]), params.rho_m, params.c_max, params.range);
  return c;
}

DecisionRecord decide(NodeId central, const Topology& base, std::span<const UncertaintyRegion> regions,
                      const DecisionParams& params, const EstimationParams& est, double now, std::uint64_t seed,
                      bool fixed_central) {
  DecisionRecord rec;
  rec.decision_time = now;
  rec.central = central;
  rec.base = base.edges();
  const PairScores scores = score_pairs(base, regions, params, est, seed);
  PartAResult a = part_a_delete(base, scores, params, now);
  rec.deleted = a.deleted;
  rec.proposed = part_b_propose(a.remaining, scores, params, rec.deleted);
  rec.new_central = fixed_central ? central : part_c_reelect(a.remaining);
  rec.est_total_cost = estimated_total_cost(a.remaining, scores);
  return rec;
}

RealizedGraph::RealizedGraph(std::size_t n, std::span<const Edge> edges) : RealizedGraph(n) {
  for (const Edge& e : edges) add(e);
}

void RealizedGraph::add(const Edge& e) {
  if (e.v >= n_ || e.u == e.v) throw std::out_of_range("realized graph: bad edge");
  char& a = adj_[e.u * n_ + e.v];
  if (!a) {
    a = 1;
    ++count_;
  }
}

void RealizedGraph::remove(const Edge& e) {
  char& a = adj_[e.u * n_ + e.v];
  if (a) {
    a = 0;
    --count_;
  }
}

EdgeList RealizedGraph::edges() const {
  EdgeList out;
  out.reserve(count_);
  for (NodeId i = 0; i < n_; ++i)
    for (NodeId j = i + 1; j < n_; ++j)
      if (adj_[i * n_ + j]) out.push_back(Edge{i, j});
  return out;
}

void DecisionProtocol::issue(DecisionRecord record, double now, double timeout_at, Network& net,
                             std::span<const Vec> positions, RealizedGraph& realized) {
  if (pending_) throw std::logic_error("decision protocol: a decision is already pending");
  if (record.id == 0) throw std::invalid_argument("decision protocol: decision ids start at 1");
  Pending p;
  p.record = std::move(record);
  p.timeout_at = timeout_at;
  p.answered.assign(p.record.proposed.size(), 0);
  p.record.confirmed.clear();
  p.rounds.order_floods = 1;
  p.rounds.max_depth = 1;
  pending_ = std::move(p);

  Flight f;
  f.id = pending_->record.id;
  f.new_central = pending_->record.new_central;
  f.deleted = pending_->record.deleted;
  f.proposed = pending_->record.proposed;
  f.order_seen.assign(n_, 0);
  f.confirm_sent.assign(f.proposed.size(), 0);
  flights_.push_back(std::move(f));

  OrderPayload order;
  order.decision_id = pending_->record.id;
  order.central = pending_->record.central;
  order.new_central = pending_->record.new_central;
  order.decision_time = now;
  order.timeout_at = timeout_at;
  order.base = pending_->record.base;
  order.deleted = pending_->record.deleted;
  order.proposed = pending_->record.proposed;
  ControlPacket own;
  own.origin = pending_->record.central;
  own.emit_time = now;
  own.body = order;
  net.flood(own.origin, now, std::move(order), 1, positions);
  // The central acts on its own order without waiting for the network.
  on_control(own.origin, own, now, net, positions, realized);
}

void DecisionProtocol::record_answer(std::uint64_t id, const Edge& e, bool accepted, NodeId at) {
  if (pending_ && pending_->record.id == id) {
    Pending& p = *pending_;
    if (at != p.record.new_central) return;
    const auto it = std::find(p.record.proposed.begin(), p.record.proposed.end(), e);
    if (it == p.record.proposed.end()) return;
    const std::size_t k = static_cast<std::size_t>(it - p.record.proposed.begin());
    if (p.answered[k]) return;
    p.answered[k] = 1;
    ++p.answers;
    if (accepted) p.record.confirmed.push_back(e);
    return;
  }
  // Confirmation for a decision that already committed.
  for (std::size_t k = 0; k < committed_ids_.size(); k += 2) {
    if (committed_ids_[k] == id && committed_ids_[k + 1] == at && accepted) {
      late_.push_back(e);
      break;
    }
  }
}

void DecisionProtocol::on_control(NodeId receiver, const ControlPacket& packet, double time, Network& net,
                                  std::span<const Vec> positions, RealizedGraph& realized) {
  if (const auto* order = std::get_if<OrderPayload>(&packet.body)) {
    auto fit = std::find_if(flights_.begin(), flights_.end(),
                            [&](const Flight& f) { return f.id == order->decision_id; });
    if (fit == flights_.end()) return;
    Flight& f = *fit;
    if (f.order_seen[receiver]) return;
    f.order_seen[receiver] = 1;
    ++f.seen;
    const bool live = pending_ && pending_->record.id == f.id;
    if (live && receiver == f.new_central) pending_->new_central_has_order = true;
    // A node that already acted on a newer order ignores this one.
    if (last_order_[receiver] < f.id) {
      last_order_[receiver] = f.id;
      for (const Edge& e : f.deleted)
        if (e.touches(receiver)) realized.remove(e);
      for (std::size_t k = 0; k < f.proposed.size(); ++k) {
        const Edge& e = f.proposed[k];
        if (!e.touches(receiver) || !f.order_seen[e.other(receiver)]) continue;
        if (f.confirm_sent[k]) {
          if (live) pending_->rounds.duplicate_confirm = true;
          continue;
        }
        f.confirm_sent[k] = 1;
        const bool ok = distance(positions[e.u], positions[e.v]) <= net.config().channel.range;
        if (ok) realized.add(e);
        if (live) {
          ++pending_->rounds.confirm_floods;
          pending_->rounds.confirmation_phases = 1;
          pending_->rounds.max_depth = std::max(pending_->rounds.max_depth, 2);
        }
        // Answer is local when the responder is the committing node.
        if (receiver == f.new_central) record_answer(f.id, e, ok, receiver);
        net.flood(receiver, time, ConfirmPayload{f.id, e, ok, receiver}, 2, positions);
      }
    }
    if (f.seen == n_ && !live) flights_.erase(fit);
    return;
  }
  const auto& confirm = std::get<ConfirmPayload>(packet.body);
  record_answer(confirm.decision_id, confirm.edge, confirm.accepted, receiver);
}

std::optional<CommitResult> DecisionProtocol::poll(double now) {
  if (!pending_) return std::nullopt;
  Pending& p = *pending_;
  const bool complete = p.new_central_has_order && p.answers == p.record.proposed.size();
  if (!complete && now < p.timeout_at) return std::nullopt;
  CommitResult out;
  std::sort(p.record.confirmed.begin(), p.record.confirmed.end());
  out.timed_out = !complete;
  out.rounds = p.rounds;
  const Topology base(n_, p.record.base);
  out.committed = decremental_update(base, p.record.deleted, p.record.confirmed);
  out.record = std::move(p.record);
  committed_ids_.push_back(out.record.id);
  committed_ids_.push_back(out.record.new_central);
  std::erase_if(flights_, [&](const Flight& f) { return f.id == out.record.id && f.seen == n_; });
  if (flights_.size() > 8) flights_.erase(flights_.begin());
  if (committed_ids_.size() > 16) committed_ids_.erase(committed_ids_.begin(), committed_ids_.begin() + 2);
  pending_.reset();
  return out;
}

std::vector<Edge> DecisionProtocol::take_late_confirmations() {
  std::vector<Edge> out;
  out.swap(late_);
  return out;
}

}  // namespace hytop
