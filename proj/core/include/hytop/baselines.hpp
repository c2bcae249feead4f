#pragma once

// Comparison planners working on ground-truth positions: a minimum spanning
// tree over the communication graph, and the same tree repaired to meet a
// diameter bound. The fixed-leader variant of the hybrid method is just
// decide(..., fixed_central = true).

#include <span>
#include <string>

#include "hytop/decision.hpp"
#include "hytop/graph.hpp"

namespace hytop {

enum class Method { Hybrid, MstIdeal, MstDiameter, FixedLeader };

/// "A", "B", "C", "D".
char method_tag(Method m);
Method parse_method(const std::string& tag);

/// All pairs within `range`.
EdgeList communication_edges(std::span<const Vec> positions, double range);
Topology communication_graph(std::span<const Vec> positions, double range);

/// Kruskal over the communication graph weighted by true edge cost; equal
/// costs are ordered by length, then by (u, v). Throws
/// DisconnectedGraphError when the communication graph is disconnected.
EdgeList mst_ideal_edges(std::span<const Vec> positions, const DecisionParams& params);
Topology mst_ideal(std::span<const Vec> positions, const DecisionParams& params);

struct BoundedTree {
  Topology topology;
  bool violation = false;   // bound still exceeded after the fallback
  bool fallback = false;    // BFS tree used
  std::size_t evaluations = 0;
};

/// Starts from mst_ideal and, while the diameter exceeds tau_d, adds the
/// communication edge touching the current diameter path that gives the
/// largest diameter reduction per unit added cost. Falls back to a BFS tree
/// from the communication graph's central node when no candidate helps.
BoundedTree mst_diameter_bounded(std::span<const Vec> positions, const DecisionParams& params);

/// Endpoints of one longest shortest path and the path itself.
std::vector<NodeId> diameter_path(const Topology& topo);

/// BFS spanning tree rooted at `root`, children visited in ascending id.
Topology bfs_tree(const Topology& graph, NodeId root);

}  // namespace hytop
