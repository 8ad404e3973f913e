#include "gridbarrier/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gridbarrier {

namespace {

std::string num(double v, const char* f = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string opt_steps(const std::optional<std::size_t>& s) { return s ? std::to_string(*s) : "-"; }

// Round tick spacing (1, 2 or 5 times a power of ten).
double nice_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string format_trajectory_csv(const Trajectory& traj) {
  std::ostringstream o;
  o << kTrajectoryCsvHeader << "\n";
  for (const StepRecord& r : traj.steps) {
    o << r.step << ',' << num(r.max_x) << ',' << (r.attention >= 0 ? r.attention + 1 : 0) << ','
      << num(r.alpha_s) << ',' << event_label(r.events) << ',' << num(norm2(r.u)) << ','
      << (r.violation ? 1 : 0) << "\n";
  }
  return o.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  if (traj.empty()) throw ValidationError("trajectory is empty");
  write_text(path, format_trajectory_csv(traj));
}

PlotSeries series_of(const Trajectory& traj, const std::string& label) {
  PlotSeries s;
  s.label = label;
  for (const StepRecord& r : traj.steps) s.max_x.push_back(r.max_x);
  return s;
}

std::string render_svg(std::span<const PlotSeries> series, double x_bar_pu, double nominal_kv,
                       const std::string& title) {
  constexpr double kW = 760.0, kH = 440.0;
  constexpr double kLeft = 80.0, kRight = 20.0, kTop = 40.0, kBottom = 55.0;
  constexpr std::size_t kMaxPoints = 1500;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  const double limit_kv = nominal_kv * (1.0 + x_bar_pu);
  std::size_t last_step = 1;
  double lo = limit_kv, hi = limit_kv;
  for (const PlotSeries& s : series) {
    if (s.max_x.size() > 1) last_step = std::max(last_step, s.max_x.size() - 1);
    for (double v : s.max_x) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, nominal_kv * (1.0 + v));
      hi = std::max(hi, nominal_kv * (1.0 + v));
    }
  }
  const double pad = std::max(1e-3, 0.06 * (hi - lo));
  lo -= pad;
  hi += pad;

  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double step) { return kLeft + pw * step / static_cast<double>(last_step); };
  auto py = [&](double kv) { return kTop + ph * (hi - kv) / (hi - lo); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";

  // Axes and ticks.
  o << "<g stroke=\"#444\" fill=\"none\">\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
    << "\"/>\n";
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n";
  o << "</g>\n";
  const double ystep = nice_step(hi - lo, 6);
  for (double t = std::ceil(lo / ystep) * ystep; t <= hi + 1e-12; t += ystep) {
    const std::string y = num(py(t), "%.2f");
    o << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
      << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << kLeft - 7 << "\" y=\"" << y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
      << num(t, "%.3f") << "</text>\n";
  }
  const double xstep = std::max(1.0, nice_step(static_cast<double>(last_step), 8));
  for (double t = 0.0; t <= static_cast<double>(last_step) + 1e-9; t += xstep) {
    const std::string x = num(px(t), "%.2f");
    o << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\"" << kTop + ph + 4
      << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << num(t, "%.0f")
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">step</text>\n";
  o << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << kTop + ph / 2 << ")\">max voltage (kV)</text>\n";

  // Limit.
  const std::string ly = num(py(limit_kv), "%.2f");
  o << "<line x1=\"" << kLeft << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw << "\" y2=\"" << ly
    << "\" stroke=\"#000\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    if (s.max_x.empty()) continue;
    const char* color = palette[k % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    if (s.max_x.size() == 1) {
      const std::string y = num(py(nominal_kv * (1.0 + s.max_x[0])), "%.2f");
      o << num(px(0), "%.2f") << ',' << y << ' ' << num(px(static_cast<double>(last_step)), "%.2f") << ',' << y;
    } else {
      const std::size_t stride = (s.max_x.size() + kMaxPoints - 1) / kMaxPoints;
      for (std::size_t i = 0; i < s.max_x.size(); i += stride) {
        if (i > 0) o << ' ';
        o << num(px(static_cast<double>(i)), "%.2f") << ',' << num(py(nominal_kv * (1.0 + s.max_x[i])), "%.2f");
      }
      const std::size_t end = s.max_x.size() - 1;
      if (end % stride != 0) {
        o << ' ' << num(px(static_cast<double>(end)), "%.2f") << ','
          << num(py(nominal_kv * (1.0 + s.max_x[end])), "%.2f");
      }
    }
    o << "\"/>\n";
  }

  // Legend, top right.
  const double lx = kLeft + pw - 200.0;
  double ly0 = kTop + 10.0;
  o << "<g>\n";
  for (std::size_t k = 0; k < series.size(); ++k, ly0 += 16.0) {
    o << "<line x1=\"" << lx << "\" y1=\"" << ly0 << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly0 << "\" stroke=\""
      << palette[k % std::size(palette)] << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << lx + 28 << "\" y=\"" << ly0 << "\" dominant-baseline=\"middle\">"
      << xml_escape(series[k].label) << "</text>\n";
  }
  o << "<line x1=\"" << lx << "\" y1=\"" << ly0 << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly0
    << "\" stroke=\"#000\" stroke-dasharray=\"6,4\"/>\n";
  o << "<text x=\"" << lx + 28 << "\" y=\"" << ly0 << "\" dominant-baseline=\"middle\">limit "
    << num(limit_kv, "%.2f") << " kV</text>\n";
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string format_summary(const ExperimentResult& r) {
  const double kv = r.scenario.network.nominal_kv;
  std::ostringstream o;
  o << "scenario " << r.scenario.name << ": " << r.network.n << " buses, limit "
    << num(kv * (1.0 + r.scenario.x_bar_pu()), "%.2f") << " kV\n";
  for (const EstimateReport& e : r.estimates) {
    o << "estimate " << e.name << ": realized error " << num(100.0 * e.realized_error, "%.1f")
      << "%, eps_B " << num(e.eps_b, "%.4g") << ", magnitude " << num(e.magnitude, "%.4g") << ", transpositions "
      << e.transpositions << "\n";
  }
  o << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-14s %10s %10s %9s %9s %10s %12s\n", "method", "status", "max_pu",
                "max_kV", "steps", "settle", "violations", "cost");
  o << line;
  for (const MethodResult& m : r.methods) {
    const bool has = m.status != "error";
    std::snprintf(line, sizeof line, "%-22s %-14s %10s %10s %9s %9s %10zu %12s\n", m.id.c_str(),
                  m.status.c_str(), has ? num(m.final_max, "%.5f").c_str() : "-",
                  has ? num(kv * (1.0 + m.final_max), "%.3f").c_str() : "-", opt_steps(m.steps_to_convergence).c_str(),
                  opt_steps(m.settling_step).c_str(), m.violations, has ? num(m.cost, "%.6g").c_str() : "-");
    o << line;
    if (!m.message.empty()) o << "    " << m.message << "\n";
  }
  return o.str();
}

std::string format_summary_csv(const ExperimentResult& r) {
  const double kv = r.scenario.network.nominal_kv;
  std::ostringstream o;
  o << "method,estimate,status,final_max_pu,final_max_kv,steps_to_convergence,settling_step,violations,cost\n";
  for (const MethodResult& m : r.methods) {
    o << m.id << ',' << m.estimate << ',' << m.status << ',' << num(m.final_max) << ','
      << num(kv * (1.0 + m.final_max)) << ',' << (m.steps_to_convergence ? std::to_string(*m.steps_to_convergence) : "")
      << ',' << (m.settling_step ? std::to_string(*m.settling_step) : "") << ',' << m.violations << ','
      << num(m.cost) << "\n";
  }
  return o.str();
}

std::string format_sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream o;
  o << "magnitude,realized_error,eps_b,status,final_max,safe,cost,cost_optimal,gap,steps_to_convergence,violations\n";
  for (const SweepRow& r : rows) {
    o << num(r.magnitude) << ',' << num(r.realized_error) << ',' << num(r.eps_b) << ',' << r.status << ','
      << num(r.final_max) << ',' << (r.safe ? 1 : 0) << ',' << num(r.cost) << ',' << num(r.cost_optimal) << ','
      << num(r.gap) << ',' << (r.steps_to_convergence ? std::to_string(*r.steps_to_convergence) : "") << ','
      << r.violations << "\n";
  }
  return o.str();
}

std::vector<std::string> write_experiment(const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  std::vector<std::string> written;
  std::vector<PlotSeries> series;
  for (const MethodResult& m : result.methods) {
    if (m.trajectory.empty()) continue;
    const std::string path = (base / (m.id + ".csv")).string();
    write_trajectory_csv(m.trajectory, path);
    written.push_back(path);
    series.push_back(series_of(m.trajectory, m.id));
  }
  const std::string svg = (base / "comparison.svg").string();
  write_text(svg, render_svg(series, result.scenario.x_bar_pu(), result.scenario.network.nominal_kv,
                             "peak voltage, " + result.scenario.name));
  written.push_back(svg);
  const std::string csv = (base / "summary.csv").string();
  write_text(csv, format_summary_csv(result));
  written.push_back(csv);
  const std::string txt = (base / "summary.txt").string();
  write_text(txt, format_summary(result));
  written.push_back(txt);
  return written;
}

}  // namespace gridbarrier
