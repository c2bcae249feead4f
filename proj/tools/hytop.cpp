// hytop: run, batch and compare topology-control simulations.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hytop/report.hpp"
#include "hytop/scenario.hpp"
#include "hytop/simulation.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::size_t> nodes;
  std::optional<unsigned> tau_d;
  std::optional<std::size_t> steps;
  std::string out_dir = "out";
};

void add_common(CLI::App* app, Overrides& o, bool with_method) {
  app->add_option("--config", o.config, "scenario JSON file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "base seed");
  if (with_method) app->add_option("--method", o.method, "A, B, C or D");
  app->add_option("--nodes", o.nodes, "number of agents");
  app->add_option("--tau-d", o.tau_d, "diameter bound (hops)");
  app->add_option("--steps", o.steps, "simulation steps");
  app->add_option("--out-dir", o.out_dir, "output directory");
}

hytop::Scenario make_scenario(const Overrides& o) {
  hytop::Scenario s = o.config.empty() ? hytop::Scenario{} : hytop::load_scenario(o.config);
  if (o.seed) s.seed = *o.seed;
  if (o.method) s.method = hytop::parse_method(*o.method);
  if (o.nodes) s.nodes = *o.nodes;
  if (o.tau_d) s.decision.tau_d = *o.tau_d;
  if (o.steps) s.steps = *o.steps;
  hytop::validate(s);
  return s;
}

std::vector<hytop::Method> parse_methods(const std::string& list) {
  std::vector<hytop::Method> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(hytop::parse_method(tok));
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

int cmd_run(const Overrides& o, bool message_log) {
  const hytop::Scenario s = make_scenario(o);
  std::filesystem::create_directories(o.out_dir);
  std::ofstream decisions = open_out(std::filesystem::path(o.out_dir) / "decisions.ndjson");
  std::ofstream messages;
  hytop::RunOptions opt;
  opt.abort_on_violation = false;
  opt.check_soundness = true;
  opt.decision_log = &decisions;
  if (message_log) {
    messages = open_out(std::filesystem::path(o.out_dir) / "messages.ndjson");
    opt.message_log = &messages;
  }
  {
    std::ofstream f = open_out(std::filesystem::path(o.out_dir) / "scenario.json");
    f << hytop::scenario_to_json(s) << '\n';
  }
  const hytop::RunMetrics m = hytop::run(s, opt);
  hytop::emit_plots(o.out_dir, m, s.stressed_edge_line);
  std::cout << hytop::run_summary_json(m) << '\n';
  return m.ok() ? 0 : 2;
}

std::vector<hytop::BatchRow> run_cells(const std::vector<hytop::BatchCell>& cells) {
  return hytop::batch(cells, [](const std::string& label, std::size_t done, std::size_t total) {
    std::fprintf(stderr, "\r%-20s %zu/%zu", label.c_str(), done, total);
    if (done == total) std::fprintf(stderr, "\n");
  });
}

int report_rows(const std::vector<hytop::BatchRow>& rows, const std::string& out_dir) {
  std::cout << hytop::format_summary_table(rows);
  std::filesystem::create_directories(out_dir);
  std::ofstream f = open_out(std::filesystem::path(out_dir) / "summary.csv");
  hytop::write_summary_csv(f, rows);
  bool ok = true;
  for (const auto& r : rows) {
    for (const auto& e : r.errors) std::cerr << r.label << ": " << e << '\n';
    ok = ok && r.connectivity_violations == 0 && r.diameter_violations == 0;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid topology control for delayed multi-agent networks"};
  app.require_subcommand(1);

  Overrides run_o;
  bool message_log = false;
  auto* run = app.add_subcommand("run", "single scenario: metrics, logs and plots");
  add_common(run, run_o, true);
  run->add_flag("--message-log", message_log, "also write every delivery to messages.ndjson");

  Overrides batch_o;
  std::string batch_methods = "A";
  std::vector<std::size_t> batch_nodes;
  std::vector<unsigned> batch_tau;
  std::size_t batch_reps = 10;
  auto* bat = app.add_subcommand("batch", "scenario matrix: methods x N x tau_D");
  add_common(bat, batch_o, false);
  bat->add_option("--methods", batch_methods, "comma-separated methods");
  bat->add_option("--node-list", batch_nodes, "node counts to sweep")->delimiter(',');
  bat->add_option("--tau-list", batch_tau, "diameter bounds to sweep")->delimiter(',');
  bat->add_option("--reps", batch_reps, "repetitions per cell");

  Overrides cmp_o;
  std::string cmp_methods = "A,B,C,D";
  std::size_t cmp_reps = 20;
  auto* cmp = app.add_subcommand("compare", "methods on shared seeds with paired differences against A");
  add_common(cmp, cmp_o, false);
  cmp->add_option("--methods", cmp_methods, "comma-separated methods");
  cmp->add_option("--reps", cmp_reps, "shared seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o, message_log);

    if (*bat) {
      const hytop::Scenario base = make_scenario(batch_o);
      if (batch_nodes.empty()) batch_nodes.push_back(base.nodes);
      if (batch_tau.empty()) batch_tau.push_back(base.decision.tau_d);
      std::vector<hytop::BatchCell> cells;
      for (hytop::Method m : parse_methods(batch_methods))
        for (std::size_t n : batch_nodes)
          for (unsigned tau : batch_tau) {
            hytop::Scenario s = base;
            s.method = m;
            s.nodes = n;
            s.decision.tau_d = tau;
            hytop::validate(s);
            cells.push_back({std::string(1, hytop::method_tag(m)) + "/N" + std::to_string(n) + "/T" +
                                 std::to_string(tau),
                             s, batch_reps});
          }
      return report_rows(run_cells(cells), batch_o.out_dir);
    }

    if (*cmp) {
      const hytop::Scenario base = make_scenario(cmp_o);
      std::vector<hytop::BatchCell> cells;
      for (hytop::Method m : parse_methods(cmp_methods)) {
        hytop::Scenario s = base;
        s.method = m;
        cells.push_back({std::string(1, hytop::method_tag(m)), s, cmp_reps});
      }
      const auto rows = run_cells(cells);
      const int rc = report_rows(rows, cmp_o.out_dir);
      const hytop::BatchRow* a = nullptr;
      for (const auto& r : rows)
        if (r.method == hytop::Method::Hybrid) a = &r;
      if (a) {
        std::cout << "\npaired difference (method - A) over shared seeds\n";
        for (const auto& r : rows) {
          if (&r == a) continue;
          double sum = 0, ss = 0;
          std::size_t k = 0;
          for (std::size_t i = 0; i < std::min(r.costs.size(), a->costs.size()); ++i) {
            const double d = r.costs[i] - a->costs[i];
            if (std::isnan(d)) continue;
            sum += d;
            ss += d * d;
            ++k;
          }
          if (k < 2) continue;
          const double mean = sum / k;
          const double sd = std::sqrt(std::max(0.0, (ss - k * mean * mean) / (k - 1)));
          const double z = sd > 0 ? mean / (sd / std::sqrt(static_cast<double>(k))) : 0.0;
          std::printf("%c - A: mean %+.1f  sd %.1f  z %+.2f  (n=%zu)\n", hytop::method_tag(r.method), mean, sd, z, k);
        }
      }
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "hytop: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
