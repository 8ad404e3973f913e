#pragma once

#include <string>
#include <vector>

#include "gridbarrier/linalg.hpp"

namespace gridbarrier {

// Measured voltage above its limit by more than this counts as a violation.
inline constexpr double kViolationTolerance = 1e-6;

enum EventFlag : unsigned {
  kEventNone = 0,
  kEventInit = 1u << 0,
  kEventSaturation = 1u << 1,
  kEventSwitch = 1u << 2,
};

std::string event_label(unsigned flags);

struct StepRecord {
  std::size_t step = 0;
  Vector u;
  Vector x;
  double max_x = 0.0;
  int attention = -1;  // 0-based bus index
  double alpha_s = 0.0;
  unsigned events = kEventNone;
  bool violation = false;
};

enum class TerminalStatus { converged, max_iters, not_activated, failed };

std::string to_string(TerminalStatus s);

struct Trajectory {
  std::string method;
  std::vector<StepRecord> steps;
  TerminalStatus status = TerminalStatus::max_iters;
  std::string message;
  double wall_seconds = 0.0;

  bool empty() const { return steps.empty(); }
  const StepRecord& final() const { return steps.back(); }

  // Steps at index >= from_step whose measurement violates a limit.
  std::size_t violation_count(std::size_t from_step = 0) const;

  // First step after which the peak deviation stays within `tol` of its
  // final value.
  std::size_t settling_step(double tol = 1e-4) const;
};

// Builds a record from a measurement, filling max_x and violation.
StepRecord make_record(std::size_t step, Vector u, Vector x, std::span<const double> x_bar,
                       int attention, double alpha_s, unsigned events);

// argmax_j (x_j - x_bar_j), lowest index on ties.
std::size_t most_violated(std::span<const double> x, std::span<const double> x_bar);

}  // namespace gridbarrier
