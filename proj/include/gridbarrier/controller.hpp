#pragma once

#include <optional>
#include <vector>

#include "gridbarrier/linalg.hpp"
#include "gridbarrier/plant.hpp"
#include "gridbarrier/trajectory.hpp"

namespace gridbarrier {

// Online exponential barrier controller.
//
// The voltage constraint of the most violated ("attention") bus i is folded
// into the cost as (alpha_i / beta_i) exp(beta_i (b_i^T u + e_i - x_bar_i)).
// Only that bus carries a nonzero weight. Weights are recomputed whenever the
// unsaturated action set or the attention bus changes; between those events
// the controller takes projected steps along
//
//   F(u) = Q u + alpha_i exp(beta_i (x_i - x_bar_i)) b_hat_i
//
// using the measured x, so model error enters only through b_hat_i.

struct BarrierConfig {
  Vector beta;    // per-bus curvature, > 0
  double kappa = 0.6;
  Vector q_diag;  // diagonal of Q over (u^p, u^q), > 0
  Vector x_bar;   // per-bus upper deviation limit
  std::size_t max_iterations = 500;
  std::optional<double> eta_override;
  // eta = step_scale / L_s when no override is given. Must lie in (0, 2).
  double step_scale = 1.0;
  double tolerance = 1e-8;
  double exponent_cap = 30.0;
  // Attention follows the argmax bus only once that bus is within this
  // distance (per unit) of its limit. Infinity gives the plain argmax rule.
  double switch_guard = 2e-3;
  // With eps_B > 0, a recomputed weight never falls below the largest one
  // already used at the same bus.
  bool ratchet_weights = true;

  std::size_t buses() const { return x_bar.size(); }

  // Uniform beta, Q = diag(2 c_p, 2 c_q) so that u^T Q u / 2 equals
  // sum_i c_p (u^p_i)^2 + c_q (u^q_i)^2.
  static BarrierConfig uniform(std::size_t n, double beta, double kappa, double c_p, double c_q,
                               double x_bar);
};

void validate(const BarrierConfig& config);

struct ControllerState {
  Vector u;
  std::size_t attention = 0;
  std::vector<std::size_t> unsaturated;  // A_u, ascending
  Vector alpha_s;                        // nonzero only at `attention`
  Vector alpha_peak;                     // largest weight used so far, per bus
  double alpha_hat = 0.0;
  double gamma_s = 0.0;
  double eta = 0.0;
  double lipschitz = 0.0;
  double sigma = 1.0;
  std::size_t step_count = 0;
  bool weights_ready = false;
};

// Indices strictly inside their box.
std::vector<std::size_t> unsaturated_set(std::span<const double> u, const InverterLimits& limits);

// s1: u = ((kappa - 1) p_av, 0), attention at the largest margin. Throws
// NotActivated when no bus reaches its limit.
ControllerState initialize(const BarrierConfig& config, const InverterLimits& limits,
                           std::span<const double> x_observed);

// e_hat = x - B_hat u
Vector estimate_drop(const Matrix& b_hat, std::span<const double> x_observed,
                     std::span<const double> u_current);

struct KktSolution {
  Vector u;
  Vector alpha;
};

// Solves [[Q, B^T], [B, 0]] [u; alpha] = [0; rhs]. Throws SingularKKT when the
// rows of B are dependent.
KktSolution compute_alpha_kkt(const Matrix& q, const Matrix& b_rows, std::span<const double> rhs);

struct AlphaHat {
  double alpha_hat = 0.0;
  Vector u_candidate;  // full length; saturated entries copied from u
  double drop = 0.0;   // e_hat_{i,A_u}
};

// Single-constraint system on the unsaturated set, with the saturated
// actions' contribution moved into the drop term.
AlphaHat compute_alpha_hat(std::span<const double> q_diag, const Matrix& b_hat, double x_bar_i,
                           std::size_t attention, std::span<const std::size_t> unsaturated,
                           std::span<const double> e_hat, std::span<const double> u);

// gamma_s = eps_B / |b^T Q^-1 b| * (||u_lo|| + ||Q^-1 b|| |alpha_hat|), with b
// and Q restricted to the unsaturated set. Throws DegenerateConstraint.
double compute_gamma_s(double eps_b, std::span<const double> q_diag_au,
                       std::span<const double> b_hat_au, std::span<const double> u_lo,
                       double alpha_hat);

struct StepSize {
  double lipschitz = 0.0;
  double eta = 0.0;
};

// L_s = lambda_max(Q_Au) + sigma alpha beta ||b|| (||b|| + eps_B);
// eta = scale / L_s unless overridden.
StepSize compute_step_size(std::span<const double> q_diag_au, double alpha_s_i, double beta_i,
                           std::span<const double> b_hat_i, double eps_b, double sigma,
                           double scale = 1.0, std::optional<double> eta_override = {});

// Q u + alpha_i exp(min(cap, beta_i (x_i - x_bar_i))) b_hat_i
Vector gradient_feedback(const ControllerState& state, const BarrierConfig& config,
                         const Matrix& b_hat, std::span<const double> x_measured);

// u' = clamp(u - eta F, lo, hi)
Vector projected_step(std::span<const double> u, std::span<const double> f, double eta,
                      const InverterLimits& limits);

class BarrierController {
 public:
  BarrierController(BarrierConfig config, InverterLimits limits, ModelEstimate estimate);

  // s1 from the uncontrolled measurement (u = 0).
  const ControllerState& initialize(std::span<const double> x_uncontrolled);

  // s2, and the body of s5/s6: e_hat, alpha_hat, gamma_s, alpha_s, sigma, eta.
  void compute_weights(std::span<const double> x_measured);

  Vector gradient(std::span<const double> x_measured) const;

  // s3
  const ControllerState& step(std::span<const double> x_measured);

  // s5/s6 after measuring the new point; returns the event flags raised.
  unsigned handle_events(std::span<const double> x_measured);

  // Attention-switch test used by handle_events.
  bool should_switch(std::span<const double> x_measured) const;

  const ControllerState& state() const { return state_; }
  const BarrierConfig& config() const { return config_; }
  const InverterLimits& limits() const { return limits_; }
  const ModelEstimate& estimate() const { return estimate_; }

 private:
  BarrierConfig config_;
  InverterLimits limits_;
  ModelEstimate estimate_;
  ControllerState state_;
};

// Whole loop: measure uncontrolled, s1, s2, then up to max_iterations of
// s3-s6, stopping once ||u(k+1) - u(k)||_inf < tolerance with no event.
// Returns a not_activated trajectory (single record at u = 0) when no bus
// reaches its limit.
// `final_state`, when given, receives the controller state at exit.
Trajectory run_barrier(const Plant& plant, const ModelEstimate& estimate,
                       const BarrierConfig& config, const InverterLimits& limits,
                       ControllerState* final_state = nullptr);

}  // namespace gridbarrier
