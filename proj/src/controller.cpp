#include "gridbarrier/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace gridbarrier {

BarrierConfig BarrierConfig::uniform(std::size_t n, double beta, double kappa, double c_p,
                                     double c_q, double x_bar) {
  BarrierConfig c;
  c.beta.assign(n, beta);
  c.kappa = kappa;
  c.q_diag.assign(2 * n, 2.0 * c_p);
  std::fill(c.q_diag.begin() + static_cast<std::ptrdiff_t>(n), c.q_diag.end(), 2.0 * c_q);
  c.x_bar.assign(n, x_bar);
  return c;
}

void validate(const BarrierConfig& config) {
  const std::size_t n = config.buses();
  if (n == 0) throw ValidationError("controller config has no buses");
  if (config.beta.size() != n || config.q_diag.size() != 2 * n) {
    throw DimensionMismatch("beta must have n entries and Q 2n diagonal entries");
  }
  for (double b : config.beta)
    if (!(b > 0.0)) throw ValidationError("barrier curvature beta must be > 0");
  for (double q : config.q_diag)
    if (!(q > 0.0)) throw ValidationError("cost diagonal Q must be > 0");
  if (!(config.kappa > 0.0 && config.kappa <= 1.0)) throw ValidationError("kappa must lie in (0, 1]");
  if (!(config.step_scale > 0.0 && config.step_scale < 2.0)) {
    throw ValidationError("step scale must lie in (0, 2)");
  }
  if (!(config.switch_guard >= 0.0)) throw ValidationError("switch guard must be >= 0");
  if (config.eta_override && !(*config.eta_override > 0.0)) throw ValidationError("eta must be > 0");
  if (!(config.tolerance > 0.0)) throw ValidationError("tolerance must be > 0");
}

std::vector<std::size_t> unsaturated_set(std::span<const double> u, const InverterLimits& limits) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (limits.lo[j] < u[j] && u[j] < limits.hi[j]) out.push_back(j);
  return out;
}

ControllerState initialize(const BarrierConfig& config, const InverterLimits& limits,
                           std::span<const double> x_observed) {
  const std::size_t n = config.buses();
  if (x_observed.size() != n || limits.size() != 2 * n) {
    throw DimensionMismatch("initialize: measurement or limits do not match the configuration");
  }
  const std::size_t worst = most_violated(x_observed, config.x_bar);
  if (x_observed[worst] < config.x_bar[worst]) {
    throw NotActivated("no bus reaches its voltage limit; the controller stays idle");
  }
  ControllerState s;
  s.u.assign(2 * n, 0.0);
  const Vector p_av = limits.p_av();
  for (std::size_t k = 0; k < n; ++k) s.u[k] = (config.kappa - 1.0) * p_av[k];
  s.u = project_to_box(s.u, limits);
  s.attention = worst;
  s.unsaturated = unsaturated_set(s.u, limits);
  s.alpha_s.assign(n, 0.0);
  s.alpha_peak.assign(n, 0.0);
  return s;
}

Vector estimate_drop(const Matrix& b_hat, std::span<const double> x_observed,
                     std::span<const double> u_current) {
  if (b_hat.rows() != x_observed.size()) throw DimensionMismatch("estimate_drop: row mismatch");
  return subtract(x_observed, b_hat * u_current);
}

KktSolution compute_alpha_kkt(const Matrix& q, const Matrix& b_rows, std::span<const double> rhs) {
  const std::size_t m = q.rows();
  const std::size_t a = b_rows.rows();
  if (!q.square() || b_rows.cols() != m || rhs.size() != a) {
    throw DimensionMismatch("compute_alpha_kkt: inconsistent block sizes");
  }
  Matrix kkt(m + a, m + a);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) kkt(i, j) = q(i, j);
  for (std::size_t r = 0; r < a; ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      kkt(m + r, j) = b_rows(r, j);
      kkt(j, m + r) = b_rows(r, j);
    }
  }
  Vector full(m + a, 0.0);
  std::copy(rhs.begin(), rhs.end(), full.begin() + static_cast<std::ptrdiff_t>(m));
  Vector sol;
  try {
    sol = solve_linear(kkt, full);
  } catch (const SingularMatrix& e) {
    throw SingularKKT(std::string("KKT system is singular (dependent constraint rows): ") + e.what());
  }
  KktSolution out;
  out.u.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(m));
  out.alpha.assign(sol.begin() + static_cast<std::ptrdiff_t>(m), sol.end());
  return out;
}

AlphaHat compute_alpha_hat(std::span<const double> q_diag, const Matrix& b_hat, double x_bar_i,
                           std::size_t attention, std::span<const std::size_t> unsaturated,
                           std::span<const double> e_hat, std::span<const double> u) {
  if (unsaturated.empty()) throw SingularKKT("no unsaturated action left to move");
  if (attention >= b_hat.rows() || u.size() != b_hat.cols() || q_diag.size() != b_hat.cols()) {
    throw DimensionMismatch("compute_alpha_hat: inconsistent sizes");
  }
  const auto row = b_hat.row(attention);
  std::vector<bool> free(u.size(), false);
  for (std::size_t j : unsaturated) free[j] = true;

  // Saturated actions are constants: they shift the drop seen by the free ones.
  double drop = e_hat[attention];
  for (std::size_t j = 0; j < u.size(); ++j)
    if (!free[j]) drop += row[j] * u[j];

  const std::size_t m = unsaturated.size();
  bool sensitive = false;
  for (std::size_t j : unsaturated) sensitive = sensitive || row[j] != 0.0;
  if (!sensitive) {
    throw DegenerateConstraint("bus " + std::to_string(attention + 1) +
                               " has no sensitivity to any unsaturated action");
  }
  Matrix q(m, m);
  Matrix b(1, m);
  for (std::size_t k = 0; k < m; ++k) {
    q(k, k) = q_diag[unsaturated[k]];
    b(0, k) = row[unsaturated[k]];
  }
  const double rhs = x_bar_i - drop;
  const KktSolution kkt = compute_alpha_kkt(q, b, std::span<const double>(&rhs, 1));

  AlphaHat out;
  out.alpha_hat = kkt.alpha[0];
  out.drop = drop;
  out.u_candidate.assign(u.begin(), u.end());
  for (std::size_t k = 0; k < m; ++k) out.u_candidate[unsaturated[k]] = kkt.u[k];
  return out;
}

double compute_gamma_s(double eps_b, std::span<const double> q_diag_au,
                       std::span<const double> b_hat_au, std::span<const double> u_lo,
                       double alpha_hat) {
  if (q_diag_au.size() != b_hat_au.size()) throw DimensionMismatch("compute_gamma_s: size mismatch");
  Vector qinv_b(b_hat_au.size());
  for (std::size_t k = 0; k < b_hat_au.size(); ++k) qinv_b[k] = b_hat_au[k] / q_diag_au[k];
  const double curvature = std::abs(dot(b_hat_au, qinv_b));
  if (curvature == 0.0) {
    throw DegenerateConstraint("attention bus has no sensitivity to the unsaturated actions");
  }
  return eps_b / curvature * (norm2(u_lo) + norm2(qinv_b) * std::abs(alpha_hat));
}

StepSize compute_step_size(std::span<const double> q_diag_au, double alpha_s_i, double beta_i,
                           std::span<const double> b_hat_i, double eps_b, double sigma,
                           double scale, std::optional<double> eta_override) {
  double lambda_max = 0.0;
  for (double q : q_diag_au) lambda_max = std::max(lambda_max, q);
  const double bn = norm2(b_hat_i);
  StepSize s;
  s.lipschitz = lambda_max + sigma * alpha_s_i * beta_i * bn * (bn + eps_b);
  if (eta_override) {
    s.eta = *eta_override;
  } else {
    s.eta = s.lipschitz > 0.0 ? scale / s.lipschitz : scale;
  }
  return s;
}

Vector gradient_feedback(const ControllerState& state, const BarrierConfig& config,
                         const Matrix& b_hat, std::span<const double> x_measured) {
  Vector f(state.u.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = config.q_diag[j] * state.u[j];
  const std::size_t i = state.attention;
  const double alpha = state.alpha_s.empty() ? 0.0 : state.alpha_s[i];
  if (alpha == 0.0) return f;
  const double expo = std::min(config.exponent_cap, config.beta[i] * (x_measured[i] - config.x_bar[i]));
  const double w = alpha * std::exp(expo);
  const auto row = b_hat.row(i);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] += w * row[j];
  return f;
}

Vector projected_step(std::span<const double> u, std::span<const double> f, double eta,
                      const InverterLimits& limits) {
  return project_to_box(axpy(-eta, f, u), limits);
}

BarrierController::BarrierController(BarrierConfig config, InverterLimits limits,
                                     ModelEstimate estimate)
    : config_(std::move(config)), limits_(std::move(limits)), estimate_(std::move(estimate)) {
  validate(config_);
  validate(limits_);
  const std::size_t n = config_.buses();
  if (limits_.size() != 2 * n || estimate_.b_hat.rows() != n || estimate_.b_hat.cols() != 2 * n) {
    throw DimensionMismatch("controller: config, limits and model estimate disagree on size");
  }
}

const ControllerState& BarrierController::initialize(std::span<const double> x_uncontrolled) {
  state_ = gridbarrier::initialize(config_, limits_, x_uncontrolled);
  return state_;
}

void BarrierController::compute_weights(std::span<const double> x_measured) {
  const std::size_t n = config_.buses();
  const std::size_t i = most_violated(x_measured, config_.x_bar);
  state_.attention = i;
  state_.unsaturated = unsaturated_set(state_.u, limits_);
  std::fill(state_.alpha_s.begin(), state_.alpha_s.end(), 0.0);
  state_.alpha_hat = 0.0;
  state_.gamma_s = 0.0;

  Vector q_au;
  Vector b_au;
  for (std::size_t j : state_.unsaturated) {
    q_au.push_back(config_.q_diag[j]);
    b_au.push_back(estimate_.b_hat(i, j));
  }

  if (!state_.unsaturated.empty()) {
    const Vector e_hat = estimate_drop(estimate_.b_hat, x_measured, state_.u);
    const AlphaHat ah = compute_alpha_hat(config_.q_diag, estimate_.b_hat, config_.x_bar[i], i,
                                          state_.unsaturated, e_hat, state_.u);
    state_.alpha_hat = ah.alpha_hat;
    state_.gamma_s = compute_gamma_s(estimate_.eps_b, q_au, b_au, limits_.lo, ah.alpha_hat);
    // A negative weight means the attention bus is not binding: the barrier
    // switches off and Q u relaxes the curtailment.
    state_.alpha_s[i] = std::max(0.0, state_.alpha_hat + state_.gamma_s);
    // Under model error the weight is a safety margin, not an estimate of
    // the true multiplier, so it never has to come down. Letting it drop when
    // an action leaves its bound makes the weight flip between two values
    // and the iterate chatter on that bound.
    if (config_.ratchet_weights && estimate_.eps_b > 0.0) {
      state_.alpha_s[i] = std::max(state_.alpha_s[i], state_.alpha_peak[i]);
    }
    state_.alpha_peak[i] = std::max(state_.alpha_peak[i], state_.alpha_s[i]);
  }

  double sigma = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double expo = std::min(config_.exponent_cap, config_.beta[j] * (x_measured[j] - config_.x_bar[j]));
    sigma = std::max(sigma, std::exp(expo));
  }
  state_.sigma = sigma;
  if (q_au.empty()) q_au = config_.q_diag;
  const StepSize ss = compute_step_size(q_au, state_.alpha_s[i], config_.beta[i], estimate_.b_hat.row(i),
                                        estimate_.eps_b, sigma, config_.step_scale, config_.eta_override);
  state_.lipschitz = ss.lipschitz;
  state_.eta = ss.eta;
  state_.weights_ready = true;
}

Vector BarrierController::gradient(std::span<const double> x_measured) const {
  return gradient_feedback(state_, config_, estimate_.b_hat, x_measured);
}

const ControllerState& BarrierController::step(std::span<const double> x_measured) {
  const Vector f = gradient(x_measured);
  state_.u = projected_step(state_.u, f, state_.eta, limits_);
  ++state_.step_count;
  return state_;
}

bool BarrierController::should_switch(std::span<const double> x_measured) const {
  const std::size_t j = most_violated(x_measured, config_.x_bar);
  if (j == state_.attention) return false;
  // Far from every limit the argmax is a near-tie between buses and moving
  // attention there only makes the weights flip back and forth.
  return x_measured[j] - config_.x_bar[j] > -config_.switch_guard;
}

unsigned BarrierController::handle_events(std::span<const double> x_measured) {
  unsigned flags = kEventNone;
  if (unsaturated_set(state_.u, limits_) != state_.unsaturated) flags |= kEventSaturation;
  if (should_switch(x_measured)) flags |= kEventSwitch;
  if (flags != kEventNone) compute_weights(x_measured);
  return flags;
}

Trajectory run_barrier(const Plant& plant, const ModelEstimate& estimate,
                       const BarrierConfig& config, const InverterLimits& limits,
                       ControllerState* final_state) {
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.method = "barrier";
  BarrierController ctl(config, limits, estimate);
  const std::size_t n = config.buses();

  const Vector x_unc = plant.measure(Vector(2 * n, 0.0));
  try {
    ctl.initialize(x_unc);
  } catch (const NotActivated& e) {
    traj.status = TerminalStatus::not_activated;
    traj.message = e.what();
    traj.steps.push_back(make_record(0, Vector(2 * n, 0.0), x_unc, config.x_bar,
                                     static_cast<int>(most_violated(x_unc, config.x_bar)), 0.0,
                                     kEventNone));
    return traj;
  }

  Vector x = plant.measure(ctl.state().u);
  try {
    ctl.compute_weights(x);
  } catch (const Error& e) {
    traj.status = TerminalStatus::failed;
    traj.message = e.what();
    traj.steps.push_back(make_record(0, ctl.state().u, x, config.x_bar,
                                     static_cast<int>(ctl.state().attention), 0.0, kEventInit));
    return traj;
  }
  auto record = [&](std::size_t k, unsigned flags) {
    const auto& s = ctl.state();
    traj.steps.push_back(make_record(k, s.u, x, config.x_bar, static_cast<int>(s.attention),
                                     s.alpha_s[s.attention], flags));
  };
  record(0, kEventInit);

  traj.status = TerminalStatus::max_iters;
  for (std::size_t k = 0; k < config.max_iterations; ++k) {
    const Vector u_prev = ctl.state().u;
    ctl.step(x);
    x = plant.measure(ctl.state().u);
    unsigned flags = kEventNone;
    try {
      flags = ctl.handle_events(x);
    } catch (const Error& e) {
      // The iterate is still inside the box; keep it and report why we stopped.
      traj.status = TerminalStatus::failed;
      traj.message = e.what();
      traj.steps.push_back(make_record(k + 1, ctl.state().u, x, config.x_bar,
                                       static_cast<int>(most_violated(x, config.x_bar)), 0.0,
                                       kEventNone));
      break;
    }
    record(k + 1, flags);
    if (flags == kEventNone && norm_inf(subtract(ctl.state().u, u_prev)) < config.tolerance) {
      traj.status = TerminalStatus::converged;
      break;
    }
  }
  traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (final_state) *final_state = ctl.state();
  return traj;
}

}  // namespace gridbarrier
