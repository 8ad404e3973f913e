#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridbarrier/plant.hpp"

namespace gridbarrier {

// Either a network CSV or a synthetic feeder, never both.
struct NetworkSpec {
  std::optional<std::string> file;  // resolved against the scenario's directory
  std::size_t synthetic_n = 0;
  std::uint64_t synthetic_seed = 1;
  double overload_factor = 1.0;
  double v0_mag = 1.0;
  double nominal_kv = 12.0;

  bool operator==(const NetworkSpec&) const = default;
};

// How one model estimate B_hat is derived from the true B. With a target
// the magnitude and transposition count are searched for; otherwise they
// are taken as given.
struct EstimateSpec {
  std::string name;
  PerturbationKind kind = PerturbationKind::both;
  double magnitude = 0.0;
  std::optional<double> target_relative_error;
  std::uint64_t seed = 1;
  int transpositions = 1;
  double eps_scale = 1.0;  // >= 1 inflates the bound handed to the controller

  bool operator==(const EstimateSpec&) const = default;
};

struct ControllerSpec {
  double beta = 200.0;
  double kappa = 0.6;
  double c_p = 3.0;
  double c_q = 1.0;
  double x_bar_percent = 5.0;
  std::size_t max_iterations = 500;
  std::optional<double> eta;
  double step_scale = 1.0;
  double tolerance = 1e-8;
  double switch_guard = 2e-3;
  bool ratchet_weights = true;

  bool operator==(const ControllerSpec&) const = default;
};

struct LimitsSpec {
  double reactive_fraction = 0.4;
  bool upper_zero = false;  // u <= 0 on both blocks

  bool operator==(const LimitsSpec&) const = default;
};

struct BaselineSpec {
  bool lcqp = true;
  bool primal_dual = true;
  double pd_eta_p = 0.01;
  double pd_eta_d = 0.01;
  double pd_reg = 1e-4;
  std::optional<std::size_t> pd_max_iterations;  // defaults to the controller's

  bool operator==(const BaselineSpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  NetworkSpec network;
  std::vector<EstimateSpec> estimates;  // empty: one exact-model estimate
  ControllerSpec controller;
  LimitsSpec limits;
  BaselineSpec baselines;

  double x_bar_pu() const { return controller.x_bar_percent / 100.0; }
  bool operator==(const Scenario&) const = default;
};

// Checks every invariant; throws ValidationError naming the offending field.
void validate(const Scenario& s);

// Flat `key = value` text with [network], [estimate NAME], [controller],
// [limits], [baselines] and [scenario] sections. `#` starts a comment.
// Relative network paths are resolved against `base_dir`. Throws ParseError
// (with line numbers) or ValidationError.
Scenario parse_scenario(std::istream& in, const std::string& base_dir = ".");

// Reads and parses a file, then applies the GRIDBARRIER_SEED override when
// that variable is set. Throws MissingFile when the file cannot be opened.
Scenario load_scenario(const std::string& path);

// Replaces every seed in the scenario with values derived from `seed`.
void override_seeds(Scenario& s, std::uint64_t seed);

// Canonical text form; parse_scenario(format_scenario(s)) == s.
std::string format_scenario(const Scenario& s);

}  // namespace gridbarrier
