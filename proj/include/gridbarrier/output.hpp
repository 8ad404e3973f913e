#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridbarrier/experiment.hpp"
#include "gridbarrier/trajectory.hpp"

namespace gridbarrier {

inline constexpr const char* kTrajectoryCsvHeader = "step,max_x,attention_bus,alpha_s,event,u_norm,violation";

// One row per step; bus ids 1-based, floats with 9 significant digits.
std::string format_trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> max_x;  // per-unit deviation per step
};

// Peak voltage (kV) against step, the limit as a dashed rule, and a legend.
// A single-point series is drawn as a flat line over the whole axis.
std::string render_svg(std::span<const PlotSeries> series, double x_bar_pu, double nominal_kv,
                       const std::string& title);

PlotSeries series_of(const Trajectory& traj, const std::string& label);

std::string format_summary(const ExperimentResult& result);
std::string format_summary_csv(const ExperimentResult& result);
std::string format_sweep_csv(std::span<const SweepRow> rows);

// Per-method trajectory CSVs, comparison.svg, summary.csv and summary.txt.
// Creates `dir` if needed. Returns the written paths.
std::vector<std::string> write_experiment(const ExperimentResult& result, const std::string& dir);

void write_text(const std::string& path, const std::string& content);

}  // namespace gridbarrier
