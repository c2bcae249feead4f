#include "hytop/baselines.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>

namespace hytop {

char method_tag(Method m) {
  switch (m) {
    case Method::Hybrid: return 'A';
    case Method::MstIdeal: return 'B';
    case Method::MstDiameter: return 'C';
    case Method::FixedLeader: return 'D';
  }
  return '?';
}

Method parse_method(const std::string& tag) {
  if (tag == "A" || tag == "a" || tag == "hybrid") return Method::Hybrid;
  if (tag == "B" || tag == "b" || tag == "mst-ideal") return Method::MstIdeal;
  if (tag == "C" || tag == "c" || tag == "mst-diameter") return Method::MstDiameter;
  if (tag == "D" || tag == "d" || tag == "fixed-leader") return Method::FixedLeader;
  throw std::invalid_argument("unknown method '" + tag + "' (expected A, B, C or D)");
}

EdgeList communication_edges(std::span<const Vec> positions, double range) {
  // Cell list with cell side `range`: only the 3^d surrounding cells can
  // hold a neighbour, so the scan is O(N + cells + |E|) instead of O(N^2).
  const std::size_t n = positions.size();
  EdgeList edges;
  if (n < 2) return edges;
  if (!(range > 0.0)) throw std::invalid_argument("communication_edges: range must be positive");
  Vec lo = positions[0], hi = positions[0];
  for (const Vec& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::int64_t extent[3];
  double cells = 1.0;
  for (int k = 0; k < 3; ++k) {
    extent[k] = static_cast<std::int64_t>((hi[k] - lo[k]) / range) + 1;
    cells *= static_cast<double>(extent[k]);
  }
  if (cells > 16.0 * static_cast<double>(n) + 1024.0) {
    // Very sparse relative to the range: a plain scan is cheaper than the grid.
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (distance(positions[i], positions[j]) <= range) edges.push_back(Edge{i, j});
    return edges;
  }
  auto coord = [&](const Vec& p, int k) { return static_cast<std::int64_t>((p[k] - lo[k]) / range); };
  auto key = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    return static_cast<std::size_t>((x * extent[1] + y) * extent[2] + z);
  };

  // Counting sort of node ids by cell.
  std::vector<std::size_t> start(static_cast<std::size_t>(cells) + 1, 0);
  std::vector<std::size_t> cell_of(n);
  for (NodeId i = 0; i < n; ++i) {
    cell_of[i] = key(coord(positions[i], 0), coord(positions[i], 1), coord(positions[i], 2));
    ++start[cell_of[i] + 1];
  }
  for (std::size_t c = 1; c < start.size(); ++c) start[c] += start[c - 1];
  std::vector<NodeId> order(n);
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (NodeId i = 0; i < n; ++i) order[fill[cell_of[i]]++] = i;

  for (NodeId i = 0; i < n; ++i) {
    const std::int64_t c[3] = {coord(positions[i], 0), coord(positions[i], 1), coord(positions[i], 2)};
    for (std::int64_t x = std::max<std::int64_t>(c[0] - 1, 0); x <= std::min(c[0] + 1, extent[0] - 1); ++x)
      for (std::int64_t y = std::max<std::int64_t>(c[1] - 1, 0); y <= std::min(c[1] + 1, extent[1] - 1); ++y)
        for (std::int64_t z = std::max<std::int64_t>(c[2] - 1, 0); z <= std::min(c[2] + 1, extent[2] - 1); ++z) {
          const std::size_t k = key(x, y, z);
          for (std::size_t q = start[k]; q < start[k + 1]; ++q) {
            const NodeId j = order[q];
            if (j > i && distance(positions[i], positions[j]) <= range) edges.push_back(Edge{i, j});
          }
        }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

Topology communication_graph(std::span<const Vec> positions, double range) {
  return Topology(positions.size(), communication_edges(positions, range));
}

namespace {

struct DisjointSets {
  std::vector<NodeId> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), NodeId{0}); }
  NodeId find(NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

double edge_cost(std::span<const Vec> pos, const Edge& e, const DecisionParams& p) {
  return true_edge_cost(distance(pos[e.u], pos[e.v]), p.rho_m, p.c_max, p.range);
}

}  // namespace

EdgeList mst_ideal_edges(std::span<const Vec> positions, const DecisionParams& params) {
  const std::size_t n = positions.size();
  if (n <= 1) return {};
  // Kruskal on the raw edge list; no all-pairs table for the full graph.
  const EdgeList comm = communication_edges(positions, params.range);
  struct Weighted {
    double cost;
    double length;
    Edge e;
  };
  std::vector<Weighted> w;
  w.reserve(comm.size());
  for (const Edge& e : comm)
    w.push_back({edge_cost(positions, e, params), distance(positions[e.u], positions[e.v]), e});
  std::sort(w.begin(), w.end(), [](const Weighted& a, const Weighted& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.length != b.length) return a.length < b.length;
    return a.e < b.e;
  });
  DisjointSets ds(n);
  EdgeList tree;
  for (const Weighted& x : w) {
    if (ds.unite(x.e.u, x.e.v)) tree.push_back(x.e);
    if (tree.size() + 1 == n) break;
  }
  if (tree.size() + 1 != n) throw DisconnectedGraphError();
  return tree;
}

Topology mst_ideal(std::span<const Vec> positions, const DecisionParams& params) {
  return Topology(positions.size(), mst_ideal_edges(positions, params));
}

std::vector<NodeId> diameter_path(const Topology& topo) {
  const std::size_t n = topo.size();
  if (n == 0) return {};
  const Hops d = topo.max_eccentricity();
  if (d == kUnreachable) throw DisconnectedGraphError();
  NodeId a = 0, b = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (topo.eccentricity(u) != d) continue;
    a = u;
    auto row = topo.distance_row(u);
    b = static_cast<NodeId>(std::find(row.begin(), row.end(), d) - row.begin());
    break;
  }
  // Walk from b back to a along decreasing distance, lowest id first.
  std::vector<NodeId> path{b};
  NodeId cur = b;
  while (cur != a) {
    NodeId next = cur;
    for (NodeId w : topo.neighbors(cur)) {
      if (topo.distance(a, w) + 1 == topo.distance(a, cur) && (next == cur || w < next)) next = w;
    }
    cur = next;
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Topology bfs_tree(const Topology& graph, NodeId root) {
  const std::size_t n = graph.size();
  std::vector<char> seen(n, 0);
  std::queue<NodeId> q;
  EdgeList tree;
  seen[root] = 1;
  q.push(root);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    std::vector<NodeId> nb(graph.neighbors(u).begin(), graph.neighbors(u).end());
    std::sort(nb.begin(), nb.end());
    for (NodeId w : nb) {
      if (seen[w]) continue;
      seen[w] = 1;
      tree.push_back(Edge::make(u, w));
      q.push(w);
    }
  }
  return Topology(n, tree);
}

BoundedTree mst_diameter_bounded(std::span<const Vec> positions, const DecisionParams& params) {
  BoundedTree out{mst_ideal(positions, params)};
  const std::size_t n = positions.size();
  if (n <= 1) return out;
  const Topology comm = communication_graph(positions, params.range);
  while (out.topology.max_eccentricity() > params.tau_d) {
    const Hops current = out.topology.max_eccentricity();
    const std::vector<NodeId> path = diameter_path(out.topology);
    std::vector<char> on_path(n, 0);
    for (NodeId u : path) on_path[u] = 1;
    double best_score = 0.0;
    double best_cost = 0.0;
    std::optional<Edge> best;
    for (const Edge& e : comm.edges()) {
      if (out.topology.has_edge(e) || !(on_path[e.u] || on_path[e.v])) continue;
      EdgeList trial = out.topology.edges();
      trial.push_back(e);
      const Topology t(n, trial);
      ++out.evaluations;
      const Hops after = t.max_eccentricity();
      if (after >= current) continue;
      const double gain = static_cast<double>(current - after);
      const double cost = edge_cost(positions, e, params);
      const double score = gain / (cost + 1e-6);
      if (!best || score > best_score || (score == best_score && cost < best_cost)) {
        best = e;
        best_score = score;
        best_cost = cost;
      }
    }
    if (!best) {
      out.topology = bfs_tree(comm, central_node(comm));
      out.fallback = true;
      out.violation = out.topology.max_eccentricity() > params.tau_d;
      break;
    }
    EdgeList next = out.topology.edges();
    next.push_back(*best);
    out.topology = Topology(n, next);
  }
  return out;
}

}  // namespace hytop
