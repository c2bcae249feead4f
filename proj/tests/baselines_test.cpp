#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hytop/baselines.hpp"
#include "oracles.hpp"

using namespace hytop;

namespace {

double tree_cost(const EdgeList& t, const std::vector<Vec>& pos, const DecisionParams& p) {
  double c = 0;
  for (const Edge& e : t) c += true_edge_cost(distance(pos[e.u], pos[e.v]), p.rho_m, p.c_max, p.range);
  return c;
}

double tree_length(const EdgeList& t, const std::vector<Vec>& pos) {
  double l = 0;
  for (const Edge& e : t) l += distance(pos[e.u], pos[e.v]);
  return l;
}

std::vector<Vec> decagon(double side) {
  const double r = side / (2.0 * std::sin(std::numbers::pi / 10.0));
  std::vector<Vec> p;
  for (int k = 0; k < 10; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 10.0;
    p.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
  }
  return p;
}

}  // namespace

TEST(Methods, TagsRoundTrip) {
  for (Method m : {Method::Hybrid, Method::MstIdeal, Method::MstDiameter, Method::FixedLeader})
    EXPECT_EQ(parse_method(std::string(1, method_tag(m))), m);
  EXPECT_EQ(parse_method("mst-diameter"), Method::MstDiameter);
  EXPECT_EQ(parse_method("d"), Method::FixedLeader);
  EXPECT_THROW(parse_method("E"), std::invalid_argument);
}

TEST(CommunicationGraph, RangeIsInclusive) {
  const std::vector<Vec> pos{Vec(0, 0, 0), Vec(10, 0, 0), Vec(20.5, 0, 0)};
  EXPECT_EQ(communication_graph(pos, 10.0).edges(), (EdgeList{{0, 1}}));
}

TEST(CommunicationGraph, CellListMatchesPairScan) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 70;
    const int dim = trial % 3 == 0 ? 3 : 2;
    const double side = 5.0 + trial % 60;
    std::uniform_real_distribution<double> u(-side / 2, side / 2);
    std::vector<Vec> pos;
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back(u(rng), u(rng), dim == 3 ? u(rng) : 0.0);
    if (n > 2) pos[2] = pos[1] + Vec(10.0, 0, 0);  // exactly at range
    EdgeList expect;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if ((pos[i] - pos[j]).norm() <= 10.0) expect.push_back({i, j});
    ASSERT_EQ(communication_edges(pos, 10.0), expect) << "trial " << trial;
  }
}

TEST(MstIdeal, MatchesBruteForceOnSmallInstances) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 14.0);
  DecisionParams p;
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 150; ++trial) {
    const std::size_t n = 2 + trial % 6;  // 2..7
    std::vector<Vec> pos;
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back(u(rng), u(rng), 0.0);
    const Topology comm = communication_graph(pos, p.range);
    if (!is_connected_bfs(comm)) {
      EXPECT_THROW(mst_ideal(pos, p), DisconnectedGraphError);
      continue;
    }
    double best_cost = std::numeric_limits<double>::infinity();
    double best_len = std::numeric_limits<double>::infinity();
    oracle::for_each_spanning_tree(n, comm.edges(), [&](const EdgeList& t) {
      const double c = tree_cost(t, pos, p), l = tree_length(t, pos);
      if (c < best_cost - 1e-12 || (std::abs(c - best_cost) <= 1e-12 && l < best_len)) {
        best_cost = c;
        best_len = l;
      }
    });
    const Topology mst = mst_ideal(pos, p);
    ASSERT_EQ(mst.edge_count(), n - 1);
    ASSERT_TRUE(is_connected(mst));
    ASSERT_NEAR(tree_cost(mst.edges(), pos, p), best_cost, 1e-9) << "trial " << trial;
    ASSERT_NEAR(tree_length(mst.edges(), pos), best_len, 1e-9) << "trial " << trial;
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(MstIdeal, CollinearAndTrivialCases) {
  DecisionParams p;
  const std::vector<Vec> three{Vec(0, 0, 0), Vec(4, 0, 0), Vec(8, 0, 0)};
  EXPECT_EQ(mst_ideal(three, p).edges(), (EdgeList{{0, 1}, {1, 2}}));
  const std::vector<Vec> one{Vec(0, 0, 0)};
  EXPECT_EQ(mst_ideal(one, p).edge_count(), 0u);
}

TEST(MstDiameter, UnchangedWhenWithinBound) {
  DecisionParams p;
  const std::vector<Vec> pos{Vec(0, 0, 0), Vec(4, 0, 0), Vec(8, 0, 0), Vec(4, 4, 0)};
  const BoundedTree t = mst_diameter_bounded(pos, p);
  EXPECT_EQ(t.topology, mst_ideal(pos, p));
  EXPECT_FALSE(t.fallback);
  EXPECT_EQ(t.evaluations, 0u);
}

TEST(MstDiameter, DecagonChordRepairsTheLine) {
  DecisionParams p;
  p.tau_d = 8;
  const auto pos = decagon(6.0);
  const Topology comm = communication_graph(pos, p.range);
  ASSERT_EQ(comm.edge_count(), 10u);  // only the rim
  const Topology mst = mst_ideal(pos, p);
  ASSERT_EQ(mst.max_eccentricity(), 9u);
  const BoundedTree t = mst_diameter_bounded(pos, p);
  EXPECT_FALSE(t.fallback);
  EXPECT_FALSE(t.violation);
  EXPECT_EQ(t.topology.edge_count(), 10u);
  EXPECT_EQ(t.topology.max_eccentricity(), 5u);
}

TEST(MstDiameter, InfeasibleBoundFallsBackWithFlag) {
  DecisionParams p;
  p.tau_d = 1;
  const std::vector<Vec> pos{Vec(0, 0, 0), Vec(6, 0, 0), Vec(12, 0, 0), Vec(18, 0, 0)};
  const BoundedTree t = mst_diameter_bounded(pos, p);
  EXPECT_TRUE(t.fallback);
  EXPECT_TRUE(t.violation);
  EXPECT_TRUE(is_connected(t.topology));
}

TEST(MstDiameter, AlwaysSpanningAndBoundedUnlessFlagged) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Vec> pos;
    for (int i = 0; i < 20; ++i) pos.emplace_back(u(rng), u(rng), 0.0);
    if (!is_connected_bfs(communication_graph(pos, 10.0))) continue;
    DecisionParams p;
    p.tau_d = 4 + trial % 6;
    const BoundedTree t = mst_diameter_bounded(pos, p);
    ASSERT_TRUE(is_connected(t.topology));
    if (!t.violation) {
      ASSERT_LE(t.topology.max_eccentricity(), p.tau_d);
    }
  }
}

TEST(DiameterPath, EndpointsRealiseTheDiameter) {
  const Topology t(6, EdgeList{{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5}});
  const auto path = diameter_path(t);
  ASSERT_EQ(path.size(), diameter(t) + 1);
  EXPECT_EQ(t.distance(path.front(), path.back()), diameter(t));
  for (std::size_t k = 0; k + 1 < path.size(); ++k) EXPECT_TRUE(t.has_edge(path[k], path[k + 1]));
}

TEST(BfsTree, LevelsFollowHopDistance) {
  const Topology g(5, oracle::all_pairs(5));
  const Topology star = bfs_tree(g, 2);
  EXPECT_EQ(star.edges(), (EdgeList{{0, 2}, {1, 2}, {2, 3}, {2, 4}}));
  const Topology cyc(5, EdgeList{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
  const Topology t = bfs_tree(cyc, 0);
  for (NodeId v = 0; v < 5; ++v) EXPECT_EQ(t.distance(0, v), cyc.distance(0, v));
}
