#include "gridbarrier/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridbarrier {

std::string event_label(unsigned flags) {
  if (flags == kEventNone) return "none";
  std::string s;
  auto add = [&](const char* name) {
    if (!s.empty()) s += '+';
    s += name;
  };
  if (flags & kEventInit) add("init");
  if (flags & kEventSaturation) add("saturation");
  if (flags & kEventSwitch) add("switch");
  return s;
}

std::string to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::converged:
      return "converged";
    case TerminalStatus::max_iters:
      return "max-iters";
    case TerminalStatus::not_activated:
      return "not-activated";
    case TerminalStatus::failed:
      return "failed";
  }
  return "?";
}

std::size_t Trajectory::violation_count(std::size_t from_step) const {
  std::size_t c = 0;
  for (const auto& r : steps)
    if (r.step >= from_step && r.violation) ++c;
  return c;
}

std::size_t Trajectory::settling_step(double tol) const {
  if (steps.empty()) return 0;
  const double final_max = steps.back().max_x;
  std::size_t k = steps.size();
  while (k > 0 && std::abs(steps[k - 1].max_x - final_max) <= tol) --k;
  return k < steps.size() ? steps[k].step : steps.back().step;
}

std::size_t most_violated(std::span<const double> x, std::span<const double> x_bar) {
  if (x.size() != x_bar.size() || x.empty()) throw DimensionMismatch("voltage and limit lengths differ");
  std::size_t best = 0;
  for (std::size_t j = 1; j < x.size(); ++j)
    if (x[j] - x_bar[j] > x[best] - x_bar[best]) best = j;
  return best;
}

StepRecord make_record(std::size_t step, Vector u, Vector x, std::span<const double> x_bar,
                       int attention, double alpha_s, unsigned events) {
  StepRecord r;
  r.step = step;
  r.max_x = *std::max_element(x.begin(), x.end());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, x[j] - x_bar[j]);
  r.violation = worst > kViolationTolerance;
  r.u = std::move(u);
  r.x = std::move(x);
  r.attention = attention;
  r.alpha_s = alpha_s;
  r.events = events;
  return r;
}

}  // namespace gridbarrier
