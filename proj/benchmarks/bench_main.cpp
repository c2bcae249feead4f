#include <benchmark/benchmark.h>

#include <random>

#include "hytop/baselines.hpp"
#include "hytop/decision.hpp"
#include "hytop/estimation.hpp"

using namespace hytop;

namespace {

// Uniform positions at the default density (20 agents per 30 m square),
// redrawn until the communication graph is connected.
std::vector<Vec> connected_positions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double side = 30.0 * std::sqrt(static_cast<double>(n) / 20.0);
  std::uniform_real_distribution<double> u(0.0, side);
  for (;;) {
    std::vector<Vec> pos;
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back(u(rng), u(rng), 0.0);
    if (is_connected_bfs(communication_graph(pos, 10.0))) return pos;
  }
}

std::vector<UncertaintyRegion> regions_around(const std::vector<Vec>& pos, std::size_t particles) {
  Rng rng(5);
  std::vector<UncertaintyRegion> out;
  for (NodeId i = 0; i < pos.size(); ++i) {
    UncertaintyRegion r;
    r.node = i;
    r.nominal = pos[i];
    r.bound_radius = 0.5;
    for (std::size_t k = 0; k < particles; ++k) r.particles.push_back(sample_in_ball(pos[i], 0.5, 2, rng));
    out.push_back(std::move(r));
  }
  return out;
}

void BM_TopologyFromScratch(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 1);
  const EdgeList edges = communication_graph(pos, 10.0).edges();
  for (auto _ : state) benchmark::DoNotOptimize(Topology(pos.size(), edges));
}

void BM_DecrementalSingleDeletion(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 1);
  const Topology g = communication_graph(pos, 10.0);
  const Edge del[] = {g.edges()[g.edge_count() / 2]};
  for (auto _ : state) benchmark::DoNotOptimize(decremental_update(g, del, {}));
}

void BM_PartA(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 2);
  const Topology g = communication_graph(pos, 10.0);
  PairScores s(pos.size());
  DecisionParams p;
  p.tau_d = 50;
  for (const Edge& e : g.edges()) s.set_cost(e, true_edge_cost(distance(pos[e.u], pos[e.v]), p.rho_m, p.c_max, p.range));
  for (auto _ : state) benchmark::DoNotOptimize(part_a_delete(g, s, p, 0.0));
}

void BM_Decide(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 3);
  const Topology g = communication_graph(pos, 10.0);
  const auto regions = regions_around(pos, 128);
  DecisionParams p;
  p.tau_d = 50;
  EstimationParams est;
  for (auto _ : state) benchmark::DoNotOptimize(decide(0, g, regions, p, est, 0.0, 7));
}

void BM_MstIdeal(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(mst_ideal(pos, DecisionParams{}));
}

void BM_MstIdealEdges(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(mst_ideal_edges(pos, DecisionParams{}));
}

void BM_MstDiameterBounded(benchmark::State& state) {
  const auto pos = connected_positions(static_cast<std::size_t>(state.range(0)), 4);
  DecisionParams p;
  p.tau_d = 8;
  for (auto _ : state) benchmark::DoNotOptimize(mst_diameter_bounded(pos, p));
}

}  // namespace

BENCHMARK(BM_TopologyFromScratch)->DenseRange(20, 50, 10)->Arg(100);
BENCHMARK(BM_DecrementalSingleDeletion)->DenseRange(20, 50, 10)->Arg(100);
BENCHMARK(BM_PartA)->DenseRange(20, 50, 10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Decide)->DenseRange(20, 50, 10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MstIdeal)->DenseRange(20, 50, 10);
BENCHMARK(BM_MstIdealEdges)->DenseRange(20, 50, 10)->Arg(100)->Arg(200);
BENCHMARK(BM_MstDiameterBounded)->DenseRange(20, 50, 10)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
