#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridbarrier/baselines.hpp"
#include "gridbarrier/controller.hpp"
#include "gridbarrier/netmodel.hpp"
#include "gridbarrier/scenario.hpp"

namespace gridbarrier {

struct EstimateReport {
  std::string name;
  double eps_b = 0.0;           // bound handed to the controller
  double realized_error = 0.0;  // ||B - B_hat|| / ||B||
  double magnitude = 0.0;
  int transpositions = 0;
};

// One method's outcome. Methods that fail keep status "error" and the
// message; the rest of the experiment still runs.
struct MethodResult {
  std::string id;        // file-safe, e.g. "barrier-B1"
  std::string method;    // no_control, lcqp_true, lcqp_hat, barrier, primal_dual
  std::string estimate;  // empty for methods that use the true model
  std::string status;
  std::string message;
  Vector u_final;
  Vector x_final;
  double final_max = 0.0;
  double cost = 0.0;
  std::optional<std::size_t> steps_to_convergence;  // set only when converged
  std::optional<std::size_t> settling_step;
  std::size_t violations = 0;  // violating steps after step 0
  Trajectory trajectory;       // a single record for the static methods
};

struct ExperimentResult {
  Scenario scenario;
  RadialNetwork network;
  SensitivityModel model;
  InverterLimits limits;
  std::vector<EstimateReport> estimates;
  std::vector<MethodResult> methods;

  const MethodResult* find(const std::string& id) const;
};

RadialNetwork build_network(const Scenario& s);
InverterLimits build_limits(const RadialNetwork& net, const Scenario& s);
BarrierConfig barrier_config(const Scenario& s, std::size_t n);
PrimalDualConfig primal_dual_config(const Scenario& s, std::size_t n);

// Applies the perturbation, searching for the target error when one is set.
ModelEstimate build_estimate(const Matrix& b, const EstimateSpec& spec, EstimateReport* report = nullptr);

// No-control evaluation, LCQP with the true B, then per estimate the LCQP
// with B_hat, the barrier controller and the primal-dual controller. An
// empty estimate list runs a single exact-model estimate named "exact".
ExperimentResult run_experiment(const Scenario& s);

struct SweepRow {
  double magnitude = 0.0;
  double realized_error = 0.0;
  double eps_b = 0.0;
  std::string status;
  double final_max = 0.0;
  bool safe = false;
  double cost = 0.0;
  double cost_optimal = 0.0;  // LCQP with the true B
  double gap = 0.0;           // (cost - cost_optimal) / cost_optimal
  std::optional<std::size_t> steps_to_convergence;
  std::size_t violations = 0;
};

// Runs the barrier controller once per magnitude, perturbing the true model
// as the scenario's first estimate does (parametric when there is none).
// Rows come back in input order whatever the thread count.
std::vector<SweepRow> run_sweep(const Scenario& s, std::span<const double> magnitudes,
                                unsigned threads = 1);

}  // namespace gridbarrier
