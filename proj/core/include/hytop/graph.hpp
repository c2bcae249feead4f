#pragma once

// Undirected graph with cached all-pairs hop distances, shortest-path
// counts and eccentricities. Topology is an immutable value: every edit
// goes through decremental_update(), which returns a new Topology whose
// caches match a from-scratch recomputation exactly.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace hytop {

using NodeId = std::uint32_t;
using Hops = std::uint32_t;
using PathCount = std::uint64_t;

inline constexpr Hops kUnreachable = std::numeric_limits<Hops>::max();
inline constexpr PathCount kPathCountMax = std::numeric_limits<PathCount>::max();

// Connectivity threshold on the second-smallest Laplacian eigenvalue.
inline constexpr double kConnectivityTolerance = 1e-8;

/// Unordered node pair, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b);
  bool touches(NodeId n) const { return u == n || v == n; }
  NodeId other(NodeId n) const { return n == u ? v : u; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

/// Thrown by metrics that are only defined on connected graphs.
class DisconnectedGraphError : public std::runtime_error {
 public:
  DisconnectedGraphError() : std::runtime_error("graph is disconnected: eccentricity is infinite") {}
};

struct UpdateStats {
  std::size_t rows_recomputed = 0;
  bool full_recompute = false;
};

class Topology {
 public:
  Topology() = default;
  explicit Topology(std::size_t node_count);
  Topology(std::size_t node_count, std::span<const Edge> edges);

  std::size_t size() const { return n_; }
  const EdgeList& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool has_edge(NodeId a, NodeId b) const;
  bool has_edge(const Edge& e) const { return has_edge(e.u, e.v); }
  std::span<const NodeId> neighbors(NodeId n) const { return adjacency_[n]; }
  std::size_t degree(NodeId n) const { return adjacency_[n].size(); }

  Hops distance(NodeId a, NodeId b) const { return dist_[a * n_ + b]; }
  PathCount path_count(NodeId a, NodeId b) const { return sigma_[a * n_ + b]; }
  Hops eccentricity(NodeId n) const { return ecc_[n]; }
  std::span<const Hops> distance_row(NodeId src) const { return {dist_.data() + src * n_, n_}; }
  std::span<const Hops> eccentricities() const { return ecc_; }

  /// Largest eccentricity, kUnreachable when disconnected.
  Hops max_eccentricity() const;

  /// Same edges and caches. Used by tests to compare update paths.
  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  friend Topology decremental_update(const Topology&, std::span<const Edge>, std::span<const Edge>,
                                     UpdateStats*);

  void rebuild_adjacency();
  void recompute_row(NodeId src);
  void recompute_all();

  std::size_t n_ = 0;
  EdgeList edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::uint8_t> adjacent_;
  std::vector<Hops> dist_;
  std::vector<PathCount> sigma_;
  std::vector<Hops> ecc_;
};

struct ApspResult {
  std::size_t n = 0;
  std::vector<Hops> dist;       // row-major n x n, kUnreachable if no path
  std::vector<PathCount> sigma; // row-major n x n, saturating

  Hops distance(NodeId a, NodeId b) const { return dist[a * n + b]; }
  PathCount count(NodeId a, NodeId b) const { return sigma[a * n + b]; }
};

/// L = D - A.
Eigen::MatrixXd laplacian(const Topology& topo);

/// Second-smallest eigenvalue of the Laplacian; 0 for a single node.
double algebraic_connectivity(const Topology& topo);

bool is_connected(const Topology& topo);
bool is_connected_bfs(const Topology& topo);

/// BFS-based all-pairs hop distances and shortest-path counts.
ApspResult apsp(const Topology& topo);

Hops diameter(const Topology& topo);
Hops radius(const Topology& topo);
/// Minimum-eccentricity node, lowest id on ties.
NodeId central_node(const Topology& topo);

/// True iff every shortest u-v path uses edge e. Throws std::invalid_argument
/// when e is not an edge of topo.
bool edge_is_critical(const Topology& topo, const Edge& e, NodeId u, NodeId v);

/// True iff e lies on at least one shortest u-v path.
bool edge_on_shortest_path(const Topology& topo, const Edge& e, NodeId u, NodeId v);

/// Sources u for which some deleted edge is critical for a pair (u, w).
/// For a single deleted edge these are exactly the rows whose distances,
/// and hence eccentricities, can change.
std::vector<NodeId> distance_affected_sources(const Topology& topo, std::span<const Edge> deleted);

/// Applies deletions then additions and repairs the caches by recomputing
/// only the BFS rows whose shortest-path DAG touches a changed edge.
Topology decremental_update(const Topology& topo, std::span<const Edge> deleted, std::span<const Edge> added,
                            UpdateStats* stats = nullptr);

/// Edge-list text: optional "# nodes N" header, then one "i j" pair per
/// line with 1-based ids.
Topology read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Topology& topo);

}  // namespace hytop
