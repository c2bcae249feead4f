#include "hytop/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

namespace hytop {

namespace {

PathCount sat_add(PathCount a, PathCount b) { return a > kPathCountMax - b ? kPathCountMax : a + b; }

PathCount sat_mul(PathCount a, PathCount b) {
  if (a == 0 || b == 0) return 0;
  return a > kPathCountMax / b ? kPathCountMax : a * b;
}

Hops hop_add(Hops a, Hops b) { return (a == kUnreachable || b == kUnreachable) ? kUnreachable : a + b; }

void check_node(const Topology& topo, NodeId n) {
  if (n >= topo.size()) throw std::out_of_range("node id " + std::to_string(n) + " out of range");
}

}  // namespace

Edge Edge::make(NodeId a, NodeId b) {
  if (a == b) throw std::invalid_argument("self-loop edges are not allowed");
  return a < b ? Edge{a, b} : Edge{b, a};
}

Topology::Topology(std::size_t node_count) : Topology(node_count, {}) {}

Topology::Topology(std::size_t node_count, std::span<const Edge> edges) : n_(node_count) {
  edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= n_ || e.v >= n_) throw std::out_of_range("edge endpoint out of range");
    edges_.push_back(Edge::make(e.u, e.v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  rebuild_adjacency();
  recompute_all();
}

bool Topology::has_edge(NodeId a, NodeId b) const {
  if (a >= n_ || b >= n_) return false;
  return adjacent_[a * n_ + b] != 0;
}

Hops Topology::max_eccentricity() const {
  Hops best = 0;
  for (Hops e : ecc_) best = std::max(best, e);
  return best;
}

void Topology::rebuild_adjacency() {
  adjacency_.assign(n_, {});
  adjacent_.assign(n_ * n_, 0);
  for (const Edge& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
    adjacent_[e.u * n_ + e.v] = 1;
    adjacent_[e.v * n_ + e.u] = 1;
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

void Topology::recompute_row(NodeId src) {
  Hops* dist = dist_.data() + src * n_;
  PathCount* sigma = sigma_.data() + src * n_;
  std::fill(dist, dist + n_, kUnreachable);
  std::fill(sigma, sigma + n_, PathCount{0});
  dist[src] = 0;
  sigma[src] = 1;
  std::vector<NodeId> frontier{src};
  std::vector<NodeId> next;
  Hops level = 0;
  Hops far = 0;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    next.clear();
    for (NodeId x : frontier) {
      for (NodeId y : adjacency_[x]) {
        if (dist[y] == kUnreachable) {
          dist[y] = level + 1;
          next.push_back(y);
          ++reached;
        }
        if (dist[y] == level + 1) sigma[y] = sat_add(sigma[y], sigma[x]);
      }
    }
    if (!next.empty()) far = level + 1;
    ++level;
    frontier.swap(next);
  }
  ecc_[src] = reached == n_ ? far : kUnreachable;
}

void Topology::recompute_all() {
  dist_.assign(n_ * n_, kUnreachable);
  sigma_.assign(n_ * n_, 0);
  ecc_.assign(n_, 0);
  for (NodeId s = 0; s < n_; ++s) recompute_row(s);
}

Eigen::MatrixXd laplacian(const Topology& topo) {
  const auto n = static_cast<Eigen::Index>(topo.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : topo.edges()) {
    lap(e.u, e.v) -= 1.0;
    lap(e.v, e.u) -= 1.0;
    lap(e.u, e.u) += 1.0;
    lap(e.v, e.v) += 1.0;
  }
  return lap;
}

double algebraic_connectivity(const Topology& topo) {
  if (topo.size() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(topo), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);
}

bool is_connected(const Topology& topo) {
  if (topo.size() <= 1) return true;
  return algebraic_connectivity(topo) > kConnectivityTolerance;
}

bool is_connected_bfs(const Topology& topo) {
  const std::size_t n = topo.size();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    NodeId x = q.front();
    q.pop();
    for (NodeId y : topo.neighbors(x)) {
      if (!seen[y]) {
        seen[y] = 1;
        ++count;
        q.push(y);
      }
    }
  }
  return count == n;
}

ApspResult apsp(const Topology& topo) {
  ApspResult out;
  out.n = topo.size();
  out.dist.resize(out.n * out.n);
  out.sigma.resize(out.n * out.n);
  for (NodeId a = 0; a < out.n; ++a) {
    for (NodeId b = 0; b < out.n; ++b) {
      out.dist[a * out.n + b] = topo.distance(a, b);
      out.sigma[a * out.n + b] = topo.path_count(a, b);
    }
  }
  return out;
}

Hops diameter(const Topology& topo) {
  Hops d = topo.max_eccentricity();
  if (d == kUnreachable) throw DisconnectedGraphError();
  return d;
}

Hops radius(const Topology& topo) {
  if (topo.size() == 0) return 0;
  Hops r = *std::min_element(topo.eccentricities().begin(), topo.eccentricities().end());
  if (r == kUnreachable) throw DisconnectedGraphError();
  return r;
}

NodeId central_node(const Topology& topo) {
  if (topo.size() == 0) throw std::invalid_argument("central_node of an empty graph");
  auto ecc = topo.eccentricities();
  auto it = std::min_element(ecc.begin(), ecc.end());  // first minimum = lowest id
  if (*it == kUnreachable) throw DisconnectedGraphError();
  return static_cast<NodeId>(it - ecc.begin());
}

namespace {

// Number of shortest u-v paths that use e, via the path-decomposition
// identity sigma(u,a) * sigma(b,v) when d(u,a) + 1 + d(b,v) = d(u,v).
PathCount paths_through(const Topology& topo, const Edge& e, NodeId u, NodeId v) {
  const Hops duv = topo.distance(u, v);
  if (duv == kUnreachable || u == v) return 0;
  PathCount through = 0;
  if (hop_add(hop_add(topo.distance(u, e.u), 1), topo.distance(e.v, v)) == duv)
    through = sat_add(through, sat_mul(topo.path_count(u, e.u), topo.path_count(e.v, v)));
  if (hop_add(hop_add(topo.distance(u, e.v), 1), topo.distance(e.u, v)) == duv)
    through = sat_add(through, sat_mul(topo.path_count(u, e.v), topo.path_count(e.u, v)));
  return through;
}

void require_edge(const Topology& topo, const Edge& e) {
  if (!topo.has_edge(e)) throw std::invalid_argument("edge is not part of the topology");
}

}  // namespace

bool edge_is_critical(const Topology& topo, const Edge& e, NodeId u, NodeId v) {
  require_edge(topo, e);
  check_node(topo, u);
  check_node(topo, v);
  const PathCount through = paths_through(topo, e, u, v);
  return through > 0 && through == topo.path_count(u, v);
}

bool edge_on_shortest_path(const Topology& topo, const Edge& e, NodeId u, NodeId v) {
  require_edge(topo, e);
  check_node(topo, u);
  check_node(topo, v);
  return paths_through(topo, e, u, v) > 0;
}

std::vector<NodeId> distance_affected_sources(const Topology& topo, std::span<const Edge> deleted) {
  std::vector<NodeId> out;
  for (const Edge& e : deleted) require_edge(topo, e);
  for (NodeId u = 0; u < topo.size(); ++u) {
    bool hit = false;
    for (const Edge& e : deleted) {
      for (NodeId w = 0; w < topo.size() && !hit; ++w) hit = edge_is_critical(topo, e, u, w);
      if (hit) break;
    }
    if (hit) out.push_back(u);
  }
  return out;
}

Topology decremental_update(const Topology& topo, std::span<const Edge> deleted, std::span<const Edge> added,
                            UpdateStats* stats) {
  const std::size_t n = topo.size();
  Topology out = topo;
  UpdateStats local;

  auto apply_rows = [&](const std::vector<char>& affected) {
    const auto count = static_cast<std::size_t>(std::count(affected.begin(), affected.end(), char{1}));
    if (count * 2 > n) {
      out.recompute_all();
      local.full_recompute = true;
      local.rows_recomputed += n;
      return;
    }
    for (NodeId u = 0; u < n; ++u) {
      if (affected[u]) out.recompute_row(u);
    }
    local.rows_recomputed += count;
  };

  if (!deleted.empty()) {
    std::vector<Edge> del;
    for (const Edge& raw : deleted) {
      Edge e = Edge::make(raw.u, raw.v);
      require_edge(topo, e);
      del.push_back(e);
    }
    // A row changes only if a deleted edge belongs to its BFS DAG, i.e. the
    // endpoint distances from u differ by exactly one.
    std::vector<char> affected(n, 0);
    for (NodeId u = 0; u < n; ++u) {
      for (const Edge& e : del) {
        const Hops da = topo.distance(u, e.u);
        const Hops db = topo.distance(u, e.v);
        if (da == kUnreachable || db == kUnreachable) continue;
        if (da + 1 == db || db + 1 == da) {
          affected[u] = 1;
          break;
        }
      }
    }
    std::sort(del.begin(), del.end());
    EdgeList kept;
    kept.reserve(out.edges_.size());
    std::set_difference(out.edges_.begin(), out.edges_.end(), del.begin(), del.end(), std::back_inserter(kept));
    out.edges_ = std::move(kept);
    out.rebuild_adjacency();
    apply_rows(affected);
  }

  if (!added.empty()) {
    std::vector<Edge> add;
    for (const Edge& raw : added) {
      Edge e = Edge::make(raw.u, raw.v);
      if (e.v >= n) throw std::out_of_range("added edge endpoint out of range");
      if (out.has_edge(e)) throw std::invalid_argument("added edge already present");
      add.push_back(e);
    }
    std::sort(add.begin(), add.end());
    add.erase(std::unique(add.begin(), add.end()), add.end());
    // A new edge can only shorten or multiply paths from u when its
    // endpoints sit at different distances from u.
    std::vector<char> affected(n, 0);
    for (NodeId u = 0; u < n; ++u) {
      for (const Edge& e : add) {
        if (out.distance(u, e.u) != out.distance(u, e.v)) {
          affected[u] = 1;
          break;
        }
      }
    }
    EdgeList merged;
    merged.reserve(out.edges_.size() + add.size());
    std::merge(out.edges_.begin(), out.edges_.end(), add.begin(), add.end(), std::back_inserter(merged));
    out.edges_ = std::move(merged);
    out.rebuild_adjacency();
    apply_rows(affected);
  }

  if (stats) *stats = local;
  return out;
}

Topology read_edge_list(std::istream& in) {
  std::size_t declared = 0;
  std::size_t max_id = 0;
  EdgeList edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream hs(line.substr(first + 1));
      std::string key;
      if (hs >> key && key == "nodes") hs >> declared;
      continue;
    }
    std::istringstream ls(line);
    long long a = 0;
    long long b = 0;
    if (!(ls >> a >> b) || a < 1 || b < 1)
      throw std::runtime_error("edge list line " + std::to_string(line_no) + ": expected two 1-based node ids");
    if (a == b) throw std::runtime_error("edge list line " + std::to_string(line_no) + ": self-loop");
    edges.push_back(Edge::make(static_cast<NodeId>(a - 1), static_cast<NodeId>(b - 1)));
    max_id = std::max<std::size_t>(max_id, static_cast<std::size_t>(std::max(a, b)));
  }
  if (declared != 0 && max_id > declared) throw std::runtime_error("edge list references a node beyond '# nodes'");
  return Topology(std::max(declared, max_id), edges);
}

void write_edge_list(std::ostream& out, const Topology& topo) {
  out << "# nodes " << topo.size() << '\n';
  for (const Edge& e : topo.edges()) out << (e.u + 1) << ' ' << (e.v + 1) << '\n';
}

}  // namespace hytop
