#include "hytop/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hytop {

double RunMetrics::mean_decision_seconds() const {
  return decisions_started ? decision_seconds / static_cast<double>(decisions_started) : 0.0;
}

std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep) { return derive_seed(base_seed, {rep}); }

std::vector<Vec> place_agents(const Scenario& s, Rng& rng) {
  const double side = s.resolved_box_side();
  const Hops bound = s.resolved_placement_diameter();
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Vec> pos(s.nodes, Vec::Zero());
  for (std::size_t attempt = 0; attempt < s.placement_attempts; ++attempt) {
    for (Vec& p : pos) {
      p = Vec::Zero();
      for (int k = 0; k < s.dimension; ++k) p[k] = u(rng);
    }
    const Topology comm = communication_graph(pos, s.channel.range);
    if (s.nodes > 1 && !is_connected_bfs(comm)) continue;
    if (comm.max_eccentricity() > bound) continue;
    return pos;
  }
  throw std::runtime_error("placement: no connected configuration within the diameter bound after " +
                           std::to_string(s.placement_attempts) + " attempts; enlarge the range or shrink the box");
}

namespace {

using Clock = std::chrono::steady_clock;

nlohmann::json edges_json(std::span<const Edge> edges) {
  nlohmann::json a = nlohmann::json::array();
  for (const Edge& e : edges) a.push_back({e.u + 1, e.v + 1});
  return a;
}

EdgeList difference(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::shared_ptr<const WaypointPath>> make_missions(const Scenario& s, std::span<const Vec> start,
                                                               Rng& rng) {
  std::vector<std::shared_ptr<const WaypointPath>> paths;
  paths.reserve(start.size());
  Vec centroid = Vec::Zero();
  for (const Vec& p : start) centroid += p;
  if (!start.empty()) centroid /= static_cast<double>(start.size());
  const double side = s.resolved_box_side();
  const double arena = side * s.mission.arena_scale;
  const double lo = 0.5 * (side - arena);
  std::uniform_real_distribution<double> u(lo, lo + arena);
  for (const Vec& p : start) {
    std::vector<Vec> w{p};
    switch (s.mission.kind) {
      case MissionKind::Static:
        break;
      case MissionKind::Disperse: {
        Vec dir = p - centroid;
        dir += 0.5 * dir.norm() * random_direction(s.dimension, rng);
        if (dir.norm() < 1e-9) dir = random_direction(s.dimension, rng);
        w.push_back(p + s.mission.goal_distance * dir.normalized());
        break;
      }
      case MissionKind::Roam:
        for (std::size_t k = 0; k < s.mission.waypoints; ++k) {
          Vec q = Vec::Zero();
          for (int d = 0; d < s.dimension; ++d) q[d] = u(rng);
          w.push_back(q);
        }
        break;
    }
    paths.push_back(std::make_shared<const WaypointPath>(std::move(w)));
  }
  return paths;
}

class Simulation {
 public:
  Simulation(const Scenario& s, const RunOptions& opt)
      : s_(s),
        opt_(opt),
        n_(s.nodes),
        net_(s.nodes, NetworkConfig{s.channel, s.dt, s.truncate_k, s.drop_probability}, derive_seed(s.seed, {4})),
        protocol_(s.nodes) {
    validate(s_);
    Rng placement(derive_seed(s_.seed, {1}));
    pos_ = place_agents(s_, placement);
    Rng mission(derive_seed(s_.seed, {2}));
    paths_ = make_missions(s_, pos_, mission);
    progress_.assign(n_, 0.0);
    rates_.assign(n_, 1.0);
    disturbance_.reserve(n_);
    DisturbanceModel dm{s_.dynamics.d_max, s_.disturbance, s_.dimension};
    for (NodeId i = 0; i < n_; ++i) disturbance_.emplace_back(dm, derive_seed(s_.seed, {3, i}));

    base_ = communication_graph(pos_, s_.channel.range);
    realized_ = RealizedGraph(n_, base_.edges());
    central_ = n_ ? central_node(base_) : 0;
    for (NodeId i = 0; i < n_; ++i)
      for (NodeId j = 0; j < n_; ++j) net_.kb(i).seed(j, pos_[j], 0.0, 0.0);
    if (opt_.message_log) net_.set_message_log(opt_.message_log);

    m_.seed = s_.seed;
    m_.method = s_.method;
    m_.nodes = n_;
    m_.tau_d = s_.decision.tau_d;
    m_.initial_positions = pos_;
    m_.steps.reserve(s_.steps);
  }

  RunMetrics run() {
    const bool uses_network = s_.method == Method::Hybrid || s_.method == Method::FixedLeader;
    for (std::size_t k = 0; k < s_.steps; ++k) {
      const double t = static_cast<double>(k) * s_.dt;
      const double t_next = static_cast<double>(k + 1) * s_.dt;
      if (uses_network) {
        net_.schedule_broadcast_round(t);
        net_.advance(t_next, pos_, progress_, [&](NodeId r, const ControlPacket& p, double time) {
          protocol_.on_control(r, p, time, net_, pos_, realized_);
        }, rates_);
        if (auto c = protocol_.poll(t_next)) commit(std::move(*c), t_next);
        for (const Edge& e : protocol_.take_late_confirmations()) {
          if (realized_.has(e) && !base_.has_edge(e)) {
            const Edge add[] = {e};
            base_ = decremental_update(base_, {}, add);
            ++m_.late_confirmations;
          }
        }
      }
      physics(t);
      if ((k + 1) % s_.cadence == 0) decision(t_next);
      sample(t_next);
    }
    m_.final_positions = pos_;
    m_.final_edges = base_.edges();
    m_.final_central = central_;
    if (m_.final_region_radius.empty()) m_.final_region_radius.assign(n_, 0.0);
    m_.network = net_.counters();
    return std::move(m_);
  }

 private:
  void physics(double t) {
    const double dt = s_.dt;
    const double hold = s_.mission.hold_fraction * s_.channel.range;
    const EdgeList links = realized_.edges();
    std::vector<std::vector<NodeId>> adj(n_);
    for (const Edge& e : links) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    std::vector<Vec> next(n_);
    for (NodeId i = 0; i < n_; ++i) {
      const WaypointPath& path = *paths_[i];
      const double s_now = progress_[i];
      const double s_next = std::min(path.length(), s_now + s_.mission.speed * dt);
      bool allowed = s_next > s_now;
      if (allowed) {
        const Vec stride = path.at(s_next) - path.at(s_now);
        for (NodeId j : adj[i]) {
          if (distance(pos_[i], pos_[j]) < hold) continue;
          if (stride.dot(pos_[j] - pos_[i]) < 0.0) {
            allowed = false;
            break;
          }
        }
      }
      TrackingPolicy policy{s_.tracking_gain,
                            ReferenceTrajectory{paths_[i], s_.mission.speed, t, s_now, allowed ? 1.0 : 0.0}};
      next[i] = step(AgentState{i, pos_[i], t}, policy, disturbance_[i], dt).x;
      if (allowed) progress_[i] = s_next;
      rates_[i] = allowed ? 1.0 : 0.0;
    }
    pos_ = std::move(next);
    if (s_.mission.tether) tether(links);
    const double limit = s_.channel.range * (1.0 + 1e-9);
    for (const Edge& e : links) {
      if (distance(pos_[e.u], pos_[e.v]) > limit) {
        realized_.remove(e);
        ++m_.broken_links;
      }
    }
  }

  // Cyclic projection onto |x_u - x_v| <= R for every realized link.
  void tether(const EdgeList& links) {
    const double r = s_.channel.range * (1.0 - 1e-12);
    for (int pass = 0; pass < 200; ++pass) {
      double worst = 0.0;
      for (const Edge& e : links) {
        Vec d = pos_[e.v] - pos_[e.u];
        const double len = d.norm();
        if (len <= r) continue;
        worst = std::max(worst, len - r);
        const Vec shift = 0.5 * (len - r) / len * d;
        pos_[e.u] += shift;
        pos_[e.v] -= shift;
      }
      if (worst <= 1e-12 * s_.channel.range) break;
    }
  }

  TrackingPolicy peer_policy(NodeId m, const KnowledgeEntry& e) const {
    ReferenceTrajectory ref{paths_[m], s_.mission.speed, 0.0, 0.0, 1.0};
    ref = ref.restarted(e.timestamp, e.progress);
    ref.rate = e.rate;
    return TrackingPolicy{s_.tracking_gain, ref};
  }

  void decision(double now) {
    if (n_ <= 1) return;
    const std::uint64_t id = ++decision_counter_;
    if (s_.method == Method::MstIdeal || s_.method == Method::MstDiameter) {
      plan_centralized(now, id);
      return;
    }
    if (protocol_.busy()) {
      ++m_.decisions_skipped;
      return;
    }
    const auto start = Clock::now();
    RegionEstimateStats stats;
    const PolicyLookup lookup = [this](NodeId m, const KnowledgeEntry& e) { return peer_policy(m, e); };
    std::vector<UncertaintyRegion> regions =
        estimate_regions(net_.kb(central_), pos_[central_], now, lookup, s_.channel, s_.dynamics, s_.estimation,
                         derive_seed(s_.seed, {5, id}), &stats);
    if (s_.shrink_regions) {
      try {
        regions = shrink_by_connectivity(std::move(regions), base_.edges(), s_.channel.range,
                                         s_.estimation.shrink_iterations);
      } catch (const InconsistentRegionError&) {
        ++m_.shrink_failures;
        regions = estimate_regions(net_.kb(central_), pos_[central_], now, lookup, s_.channel, s_.dynamics,
                                   s_.estimation, derive_seed(s_.seed, {5, id}), nullptr);
      }
    }
    DecisionRecord rec = decide(central_, base_, regions, s_.decision, s_.estimation, now,
                                derive_seed(s_.seed, {6, id}), s_.method == Method::FixedLeader);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    rec.id = id;
    rec.compute_seconds = secs;
    m_.decision_seconds += secs;
    ++m_.decisions_started;
    m_.region_fallbacks += stats.fallbacks;

    if (opt_.check_soundness) soundness(regions);
    m_.final_region_radius.assign(n_, 0.0);
    for (NodeId i = 0; i < n_; ++i) m_.final_region_radius[i] = regions[i].spread();

    const double timeout =
        now + 2.0 * static_cast<double>(radius(base_)) * s_.channel.max_delay() + 2.0 * s_.dt;
    protocol_.issue(std::move(rec), now, timeout, net_, pos_, realized_);
    check_connected(now);
  }

  void soundness(const std::vector<UncertaintyRegion>& regions) {
    const double inv_dim = 1.0 / static_cast<double>(s_.dimension);
    for (NodeId i = 0; i < n_; ++i) {
      if (i == central_) continue;
      const UncertaintyRegion& r = regions[i];
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vec& p : r.particles) nearest = std::min(nearest, distance(p, pos_[i]));
      const double resolution =
          3.0 * r.spread() * std::pow(static_cast<double>(r.particles.size()), -inv_dim) + 1e-9;
      ++m_.soundness_checks;
      if (nearest > resolution) ++m_.soundness_misses;
    }
  }

  void plan_centralized(double now, std::uint64_t id) {
    const auto start = Clock::now();
    Topology plan;
    bool keep_previous = false;
    double secs = 0.0;
    if (s_.method == Method::MstIdeal) {
      // The hop-distance cache of the tree is harness bookkeeping, not part
      // of the method, so it is built outside the timed section.
      EdgeList tree = mst_ideal_edges(pos_, s_.decision);
      secs = std::chrono::duration<double>(Clock::now() - start).count();
      plan = Topology(n_, tree);
    } else {
      BoundedTree bt = mst_diameter_bounded(pos_, s_.decision);
      secs = std::chrono::duration<double>(Clock::now() - start).count();
      keep_previous = bt.violation;
      plan = std::move(bt.topology);
    }
    m_.decision_seconds += secs;
    ++m_.decisions_started;
    if (keep_previous) {
      ++m_.infeasible_plans;
      return;
    }
    DecisionRecord rec;
    rec.id = id;
    rec.decision_time = now;
    rec.central = central_;
    rec.base = base_.edges();
    rec.deleted = difference(base_.edges(), plan.edges());
    rec.proposed = difference(plan.edges(), base_.edges());
    rec.confirmed = rec.proposed;
    rec.new_central = central_node(plan);
    rec.compute_seconds = secs;
    CommitResult c{std::move(rec), std::move(plan), false, RoundCounters{}};
    realized_ = RealizedGraph(n_, c.committed.edges());
    commit(std::move(c), now);
  }

  void commit(CommitResult c, double now) {
    base_ = std::move(c.committed);
    central_ = c.record.new_central;
    DecisionSummary d;
    d.commit_time = now;
    d.timed_out = c.timed_out;
    d.rounds = c.rounds;
    d.committed_diameter = base_.max_eccentricity();
    if (c.timed_out) ++m_.timeouts;
    if (d.committed_diameter == kUnreachable) {
      violation(now, "committed topology is disconnected");
    } else if (s_.method != Method::MstIdeal && d.committed_diameter > s_.decision.tau_d) {
      ++m_.diameter_violations;
    }
    if (opt_.decision_log) {
      const DecisionRecord& r = c.record;
      nlohmann::json j{{"id", r.id},
                       {"method", std::string(1, method_tag(s_.method))},
                       {"decision_time", r.decision_time},
                       {"commit_time", now},
                       {"central", r.central + 1},
                       {"new_central", r.new_central + 1},
                       {"deleted", edges_json(r.deleted)},
                       {"proposed", edges_json(r.proposed)},
                       {"confirmed", edges_json(r.confirmed)},
                       {"base_edges", r.base.size()},
                       {"est_total_cost", r.est_total_cost},
                       {"compute_seconds", r.compute_seconds},
                       {"timed_out", c.timed_out},
                       {"committed_diameter", d.committed_diameter},
                       {"order_floods", c.rounds.order_floods},
                       {"confirm_floods", c.rounds.confirm_floods},
                       {"max_depth", c.rounds.max_depth}};
      *opt_.decision_log << j.dump() << '\n';
    }
    d.record = std::move(c.record);
    m_.decisions.push_back(std::move(d));
  }

  void check_connected(double now) {
    if (n_ <= 1) return;
    const Topology t = realized_.topology();
    const bool bfs = is_connected_bfs(t);
    const bool spectral = algebraic_connectivity(t) > kConnectivityTolerance;
    if (bfs != spectral) ++m_.spectral_disagreements;
    if (!bfs) violation(now, "realized topology is disconnected");
  }

  void violation(double now, const std::string& what) {
    ++m_.connectivity_violations;
    if (!opt_.abort_on_violation) return;
    std::ostringstream os;
    os << what << " at t=" << now << " (seed " << s_.seed << ", method " << method_tag(s_.method) << ")\n";
    os << "realized edges:";
    for (const Edge& e : realized_.edges()) os << ' ' << e.u + 1 << '-' << e.v + 1;
    os << "\npositions:";
    for (NodeId i = 0; i < n_; ++i) os << ' ' << i + 1 << ":(" << pos_[i].x() << ',' << pos_[i].y() << ')';
    throw InvariantViolation(os.str());
  }

  void sample(double now) {
    check_connected(now);
    StepSample st;
    st.time = now;
    st.base_edges = base_.edge_count();
    st.realized_edges = realized_.edge_count();
    for (const Edge& e : realized_.edges()) {
      const double c = true_edge_cost(distance(pos_[e.u], pos_[e.v]), s_.decision.rho_m, s_.decision.c_max,
                                      s_.channel.range);
      st.cost += c;
      if (c > 0.0) ++st.stressed_edges;
    }
    m_.cumulative_cost += st.cost;
    m_.steps.push_back(st);
  }

  Scenario s_;
  RunOptions opt_;
  std::size_t n_;
  Network net_;
  DecisionProtocol protocol_;
  std::vector<Vec> pos_;
  std::vector<double> progress_;
  std::vector<double> rates_;
  std::vector<std::shared_ptr<const WaypointPath>> paths_;
  std::vector<DisturbanceProcess> disturbance_;
  Topology base_;
  RealizedGraph realized_;
  NodeId central_ = 0;
  std::uint64_t decision_counter_ = 0;
  RunMetrics m_;
};

}  // namespace

RunMetrics run(const Scenario& scenario, const RunOptions& options) {
  Simulation sim(scenario, options);
  return sim.run();
}

double BatchRow::mean_cost() const {
  double sum = 0.0;
  std::size_t k = 0;
  for (double c : costs)
    if (!std::isnan(c)) {
      sum += c;
      ++k;
    }
  return k ? sum / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
}

double BatchRow::stddev_cost() const {
  const double mu = mean_cost();
  double ss = 0.0;
  std::size_t k = 0;
  for (double c : costs)
    if (!std::isnan(c)) {
      ss += (c - mu) * (c - mu);
      ++k;
    }
  return k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
}

double BatchRow::mean_decision_seconds() const {
  double sum = 0.0;
  std::size_t k = 0;
  for (double c : decision_seconds)
    if (!std::isnan(c)) {
      sum += c;
      ++k;
    }
  return k ? sum / static_cast<double>(k) : 0.0;
}

std::vector<BatchRow> batch(std::span<const BatchCell> cells, const BatchProgress& progress) {
  std::vector<BatchRow> rows;
  for (const BatchCell& cell : cells) {
    BatchRow row;
    row.label = cell.label;
    row.method = cell.scenario.method;
    row.nodes = cell.scenario.nodes;
    row.tau_d = cell.scenario.decision.tau_d;
    for (std::size_t rep = 0; rep < cell.repetitions; ++rep) {
      Scenario s = cell.scenario;
      s.seed = cell.repetitions == 1 ? cell.scenario.seed : repetition_seed(cell.scenario.seed, rep);
      row.seeds.push_back(s.seed);
      try {
        RunOptions opt;
        opt.abort_on_violation = false;
        const RunMetrics m = run(s, opt);
        row.costs.push_back(m.cumulative_cost);
        row.decision_seconds.push_back(m.mean_decision_seconds());
        row.connectivity_violations += m.connectivity_violations;
        row.diameter_violations += m.diameter_violations;
      } catch (const std::exception& e) {
        row.costs.push_back(std::numeric_limits<double>::quiet_NaN());
        row.decision_seconds.push_back(std::numeric_limits<double>::quiet_NaN());
        row.errors.push_back("seed " + std::to_string(s.seed) + ": " + e.what());
      }
      if (progress) progress(cell.label, rep + 1, cell.repetitions);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hytop
