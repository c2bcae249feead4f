#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "hytop/simulation.hpp"

namespace hytop {

/// step,time,base_edges,realized_edges,stressed_edges,cost,cumulative_cost
void write_trace_csv(std::ostream& out, const RunMetrics& m);
/// node,x,y,z,region_radius,central
void write_snapshot_csv(std::ostream& out, const RunMetrics& m);

/// Edge counts over time with the stressed-edge annotation line.
void write_trace_svg(std::ostream& out, const RunMetrics& m, double stressed_line);
/// Final positions, committed edges, uncertainty circles, central node starred.
void write_snapshot_svg(std::ostream& out, const RunMetrics& m);

/// JSON object with the aggregate metrics of one run.
std::string run_summary_json(const RunMetrics& m);

/// Writes trace.csv, trace.svg, snapshot.csv, snapshot.svg and summary.json
/// into `dir` (created if missing). Throws std::runtime_error naming the path.
void emit_plots(const std::filesystem::path& dir, const RunMetrics& m, double stressed_line);

/// Fixed-width text table: label, method, N, tau_D, runs, failures, mean
/// cost, sd, mean seconds per decision.
std::string format_summary_table(std::span<const BatchRow> rows);
void write_summary_csv(std::ostream& out, std::span<const BatchRow> rows);

}  // namespace hytop
