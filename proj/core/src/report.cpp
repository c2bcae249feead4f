#include "hytop/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hytop {

void write_trace_csv(std::ostream& out, const RunMetrics& m) {
  out << "step,time,base_edges,realized_edges,stressed_edges,cost,cumulative_cost\n";
  double cum = 0.0;
  for (std::size_t k = 0; k < m.steps.size(); ++k) {
    const StepSample& s = m.steps[k];
    cum += s.cost;
    out << k + 1 << ',' << s.time << ',' << s.base_edges << ',' << s.realized_edges << ',' << s.stressed_edges
        << ',' << s.cost << ',' << cum << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, const RunMetrics& m) {
  out << "node,x,y,z,region_radius,central\n";
  for (NodeId i = 0; i < m.final_positions.size(); ++i) {
    const Vec& p = m.final_positions[i];
    const double r = i < m.final_region_radius.size() ? m.final_region_radius[i] : 0.0;
    out << i + 1 << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << r << ','
        << (i == m.final_central ? 1 : 0) << '\n';
  }
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string polyline(const std::vector<double>& ys, double ymax, const char* color) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
  const double w = kWidth - 2 * kMargin, h = kHeight - 2 * kMargin;
  const double n = static_cast<double>(std::max<std::size_t>(ys.size(), 2) - 1);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const double x = kMargin + w * static_cast<double>(k) / n;
    const double y = kHeight - kMargin - h * ys[k] / ymax;
    os << fmt(x) << ',' << fmt(y) << ' ';
  }
  os << "\"/>\n";
  return os.str();
}

}  // namespace

void write_trace_svg(std::ostream& out, const RunMetrics& m, double stressed_line) {
  std::vector<double> e, er, es;
  double ymax = std::max(1.0, stressed_line);
  for (const StepSample& s : m.steps) {
    e.push_back(static_cast<double>(s.base_edges));
    er.push_back(static_cast<double>(s.realized_edges));
    es.push_back(static_cast<double>(s.stressed_edges));
    ymax = std::max({ymax, e.back(), er.back()});
  }
  ymax *= 1.1;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  const double h = kHeight - 2 * kMargin;
  const double yl = kHeight - kMargin - h * stressed_line / ymax;
  out << "<line x1=\"" << kMargin << "\" y1=\"" << fmt(yl) << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
      << fmt(yl) << "\" stroke=\"red\" stroke-dasharray=\"4 4\"/>\n";
  if (!m.steps.empty()) {
    out << polyline(e, ymax, "black");
    out << polyline(er, ymax, "green");
    out << polyline(es, ymax, "orange");
  }
  out << "<text x=\"" << kMargin << "\" y=\"20\" font-size=\"12\">|E| black, |E_r| green, |E_s| orange, "
      << "y max " << fmt(ymax) << ", steps " << m.steps.size() << "</text>\n";
  out << "</svg>\n";
}

void write_snapshot_svg(std::ostream& out, const RunMetrics& m) {
  const auto& p = m.final_positions;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!p.empty()) {
    xmin = xmax = p[0].x();
    ymin = ymax = p[0].y();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double r = i < m.final_region_radius.size() ? m.final_region_radius[i] : 0.0;
      xmin = std::min(xmin, p[i].x() - r);
      xmax = std::max(xmax, p[i].x() + r);
      ymin = std::min(ymin, p[i].y() - r);
      ymax = std::max(ymax, p[i].y() + r);
    }
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-6});
  const double scale = (std::min(kWidth, kHeight) - 2 * kMargin) / span;
  auto X = [&](double x) { return kMargin + (x - xmin) * scale; };
  auto Y = [&](double y) { return kHeight - kMargin - (y - ymin) * scale; };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Edge& e : m.final_edges)
    out << "<line x1=\"" << fmt(X(p[e.u].x())) << "\" y1=\"" << fmt(Y(p[e.u].y())) << "\" x2=\""
        << fmt(X(p[e.v].x())) << "\" y2=\"" << fmt(Y(p[e.v].y())) << "\" stroke=\"gray\"/>\n";
  for (NodeId i = 0; i < p.size(); ++i) {
    const double r = i < m.final_region_radius.size() ? m.final_region_radius[i] : 0.0;
    if (r > 0.0 && i != m.final_central)
      out << "<circle cx=\"" << fmt(X(p[i].x())) << "\" cy=\"" << fmt(Y(p[i].y())) << "\" r=\"" << fmt(r * scale)
          << "\" fill=\"none\" stroke=\"blue\" stroke-dasharray=\"2 2\"/>\n";
    if (i == m.final_central) {
      std::ostringstream pts;
      for (int k = 0; k < 10; ++k) {
        const double a = std::numbers::pi / 2 + k * std::numbers::pi / 5;
        const double rr = k % 2 ? 4.0 : 10.0;
        pts << fmt(X(p[i].x()) + rr * std::cos(a)) << ',' << fmt(Y(p[i].y()) - rr * std::sin(a)) << ' ';
      }
      out << "<polygon points=\"" << pts.str() << "\" fill=\"gold\" stroke=\"black\"/>\n";
    } else {
      out << "<circle cx=\"" << fmt(X(p[i].x())) << "\" cy=\"" << fmt(Y(p[i].y()))
          << "\" r=\"3\" fill=\"black\"/>\n";
    }
  }
  out << "</svg>\n";
}

std::string run_summary_json(const RunMetrics& m) {
  nlohmann::json j{{"seed", m.seed},
                   {"method", std::string(1, method_tag(m.method))},
                   {"nodes", m.nodes},
                   {"tau_d", m.tau_d},
                   {"steps", m.steps.size()},
                   {"cumulative_cost", m.cumulative_cost},
                   {"decisions_started", m.decisions_started},
                   {"decisions_committed", m.decisions.size()},
                   {"decisions_skipped", m.decisions_skipped},
                   {"timeouts", m.timeouts},
                   {"late_confirmations", m.late_confirmations},
                   {"infeasible_plans", m.infeasible_plans},
                   {"mean_decision_seconds", m.mean_decision_seconds()},
                   {"connectivity_violations", m.connectivity_violations},
                   {"spectral_disagreements", m.spectral_disagreements},
                   {"diameter_violations", m.diameter_violations},
                   {"broken_links", m.broken_links},
                   {"region_fallbacks", m.region_fallbacks},
                   {"shrink_failures", m.shrink_failures},
                   {"final_central", m.final_central + 1},
                   {"final_edges", m.final_edges.size()},
                   {"broadcasts", m.network.broadcasts},
                   {"deliveries", m.network.deliveries},
                   {"control_emissions", m.network.control_emissions}};
  return j.dump(2);
}

void emit_plots(const std::filesystem::path& dir, const RunMetrics& m, double stressed_line) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "trace.csv");
    write_trace_csv(f, m);
  }
  {
    auto f = open(dir / "trace.svg");
    write_trace_svg(f, m, stressed_line);
  }
  {
    auto f = open(dir / "snapshot.csv");
    write_snapshot_csv(f, m);
  }
  {
    auto f = open(dir / "snapshot.svg");
    write_snapshot_svg(f, m);
  }
  {
    auto f = open(dir / "summary.json");
    f << run_summary_json(m) << '\n';
  }
}

std::string format_summary_table(std::span<const BatchRow> rows) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-6s %4s %5s %5s %5s %12s %10s %12s\n", "label", "method", "N", "tauD",
                "runs", "fail", "mean_cost", "sd", "s/decision");
  os << line;
  for (const BatchRow& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %-6c %4zu %5u %5zu %5zu %12.1f %10.1f %12.5f\n", r.label.c_str(),
                  method_tag(r.method), r.nodes, r.tau_d, r.runs(), r.failures(), r.mean_cost(), r.stddev_cost(),
                  r.mean_decision_seconds());
    os << line;
  }
  return os.str();
}

void write_summary_csv(std::ostream& out, std::span<const BatchRow> rows) {
  out << "label,method,nodes,tau_d,runs,failures,mean_cost,sd_cost,mean_decision_seconds,connectivity_violations,"
         "diameter_violations\n";
  for (const BatchRow& r : rows)
    out << r.label << ',' << method_tag(r.method) << ',' << r.nodes << ',' << r.tau_d << ',' << r.runs() << ','
        << r.failures() << ',' << r.mean_cost() << ',' << r.stddev_cost() << ',' << r.mean_decision_seconds() << ','
        << r.connectivity_violations << ',' << r.diameter_violations << '\n';
}

}  // namespace hytop
