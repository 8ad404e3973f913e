#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridbarrier/linalg.hpp"

namespace gridbarrier {

struct Line {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
};

// Per-bus injections for a non-slack bus. Powers are per-unit, consumption
// positive for loads.
struct BusData {
  double p_e = 0.0;
  double q_e = 0.0;
  double p_av = 0.0;
  bool has_inverter = false;
};

// Radial feeder rooted at the slack bus 0. Non-slack buses are numbered
// 1..n; `buses[k - 1]` holds the data of bus k.
struct RadialNetwork {
  std::size_t n = 0;
  std::vector<Line> lines;
  double v0_mag = 1.0;
  std::vector<BusData> buses;

  Vector p_av() const;
  Vector p_e() const;
  Vector q_e() const;
  std::vector<bool> inverter_mask() const;
};

struct Impedance {
  Matrix r;
  Matrix x;
};

// Linear plant x = B u + e with B = [R X].
struct SensitivityModel {
  Matrix r;
  Matrix x;
  Matrix b;
  Vector e;

  std::size_t buses() const { return r.rows(); }
};

// Throws NotATree, NonPositiveImpedance or ValidationError.
void validate(const RadialNetwork& net);

// For each non-slack bus, the index into `net.lines` of the line joining it to
// its parent, with the root-ward parent bus. Throws NotATree.
struct TreeIndex {
  std::vector<int> parent;       // parent[k] for k in 0..n, parent[0] = -1
  std::vector<int> parent_line;  // line index toward the root, -1 for bus 0
  std::vector<int> depth;
};
TreeIndex index_tree(const RadialNetwork& net);

// Reduced admittance inverse, scaled by 1/|v0| for the linearized model.
Impedance build_impedance_matrices(const RadialNetwork& net);

// Same result by summing impedances over the shared part of the two
// root paths. No inversion involved.
Impedance common_path_oracle(const RadialNetwork& net);

// e = R (p_av - p_e) - X q_e
Vector compute_baseline_drop(const Matrix& r, const Matrix& x, const RadialNetwork& net);

SensitivityModel build_sensitivity_model(const RadialNetwork& net);

struct FeederOptions {
  // Probability that a new bus hangs off the previous one (feeder-like chains).
  double chain_bias = 0.75;
  double inverter_fraction = 0.5;
  double r_min = 0.004;
  double r_max = 0.012;
  // Uncontrolled peak deviation reached at overload_factor = 1. 0.0642 pu is
  // 12.77 kV on a 12 kV base.
  double peak_deviation = 0.0642;
};

RadialNetwork generate_synthetic_feeder(std::size_t n, std::uint64_t seed,
                                        double overload_factor,
                                        const FeederOptions& options = {});

// Network CSV with `LINES:` and `BUSES:` sections.
RadialNetwork parse_network_csv(std::istream& in);
RadialNetwork read_network_csv(const std::string& path);
std::string format_network_csv(const RadialNetwork& net);
void write_network_csv(const RadialNetwork& net, const std::string& path);

}  // namespace gridbarrier
