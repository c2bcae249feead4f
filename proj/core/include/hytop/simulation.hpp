#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hytop/scenario.hpp"

namespace hytop {

struct StepSample {
  double time = 0.0;
  std::size_t base_edges = 0;      // |E|, the committed graph
  std::size_t realized_edges = 0;  // |E_r|
  std::size_t stressed_edges = 0;  // realized edges with positive cost
  double cost = 0.0;               // instantaneous cost of the realized edges
};

struct DecisionSummary {
  DecisionRecord record;
  RoundCounters rounds;
  double commit_time = 0.0;
  bool timed_out = false;
  Hops committed_diameter = 0;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  Method method = Method::Hybrid;
  std::size_t nodes = 0;
  Hops tau_d = 0;

  std::vector<StepSample> steps;
  double cumulative_cost = 0.0;
  std::vector<DecisionSummary> decisions;

  std::size_t decisions_started = 0;
  std::size_t decisions_skipped = 0;  // a previous decision was still in flight
  std::size_t timeouts = 0;
  std::size_t late_confirmations = 0;
  std::size_t infeasible_plans = 0;   // bounded tree still over the bound; previous tree kept
  double decision_seconds = 0.0;      // decision computation only

  std::size_t connectivity_violations = 0;
  std::size_t spectral_disagreements = 0;  // lambda_2 and BFS disagree
  std::size_t diameter_violations = 0;
  std::size_t broken_links = 0;            // realized links the tether could not hold

  std::size_t region_fallbacks = 0;
  std::size_t shrink_failures = 0;
  std::size_t soundness_checks = 0;
  std::size_t soundness_misses = 0;

  std::vector<Vec> initial_positions;
  std::vector<Vec> final_positions;
  EdgeList final_edges;
  NodeId final_central = 0;
  std::vector<double> final_region_radius;
  NetworkCounters network;

  double mean_decision_seconds() const;
  bool ok() const { return connectivity_violations == 0 && diameter_violations == 0 && broken_links == 0; }
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  bool abort_on_violation = true;
  bool check_soundness = false;
  std::ostream* decision_log = nullptr;  // NDJSON, one line per committed decision
  std::ostream* message_log = nullptr;   // NDJSON, one line per delivery
};

/// Uniform placement in the scenario box, redrawn until the communication
/// graph is connected with diameter within the placement bound.
std::vector<Vec> place_agents(const Scenario& s, Rng& rng);

/// One full run. Deterministic for a given scenario (including seed).
RunMetrics run(const Scenario& scenario, const RunOptions& options = {});

/// Seed of repetition `rep` in a batch; shared by every method.
std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep);

struct BatchCell {
  std::string label;
  Scenario scenario;
  std::size_t repetitions = 1;
};

struct BatchRow {
  std::string label;
  Method method = Method::Hybrid;
  std::size_t nodes = 0;
  Hops tau_d = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> costs;             // NaN for failed runs
  std::vector<double> decision_seconds;  // per run mean
  std::vector<std::string> errors;
  std::size_t connectivity_violations = 0;
  std::size_t diameter_violations = 0;

  std::size_t runs() const { return seeds.size(); }
  std::size_t failures() const { return errors.size(); }
  double mean_cost() const;
  double stddev_cost() const;
  double mean_decision_seconds() const;
};

using BatchProgress = std::function<void(const std::string& label, std::size_t done, std::size_t total)>;

/// Runs every cell repetitions times; failures are recorded and skipped.
std::vector<BatchRow> batch(std::span<const BatchCell> cells, const BatchProgress& progress = {});

}  // namespace hytop
