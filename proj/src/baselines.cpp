#include "gridbarrier/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace gridbarrier {

namespace {

constexpr double kDropThreshold = -1e-10;
constexpr double kFeasTol = 1e-12;
constexpr std::size_t kMaxPivots = 20000;

enum class Bound : unsigned char { none, lower, upper, fixed };

struct Problem {
  std::span<const double> q;
  const Matrix& b;
  Vector rhs;  // x_bar - e
  const InverterLimits& lim;
  std::size_t n;
  std::size_t m;  // 2n

  double slack(std::size_t i, std::span<const double> u) const { return rhs[i] - dot(b.row(i), u); }

  bool feasible(std::span<const double> u, double tol) const {
    for (std::size_t i = 0; i < n; ++i)
      if (slack(i, u) < -tol) return false;
    return true;
  }
};

// Alternating projections onto violated half-spaces and the box.
bool project_feasible(const Problem& p, Vector& u, const std::vector<Bound>& bound) {
  for (int sweep = 0; sweep < 20000; ++sweep) {
    bool clean = true;
    for (std::size_t i = 0; i < p.n; ++i) {
      const double s = p.slack(i, u);
      if (s >= -kFeasTol) continue;
      clean = false;
      double nn = 0.0;
      for (std::size_t j = 0; j < p.m; ++j)
        if (bound[j] != Bound::fixed) nn += p.b(i, j) * p.b(i, j);
      if (nn == 0.0) return false;
      for (std::size_t j = 0; j < p.m; ++j)
        if (bound[j] != Bound::fixed) u[j] += s / nn * p.b(i, j);
      u = project_to_box(u, p.lim);
    }
    if (clean) return true;
  }
  return p.feasible(u, kFeasTol);
}

Vector feasible_start(const Problem& p, const std::vector<Bound>& bound) {
  Vector u = project_to_box(Vector(p.m, 0.0), p.lim);
  if (p.feasible(u, 0.0)) return u;

  // Each voltage row is minimized over the box at the corner picked by the
  // sign of its coefficients. When every column has one sign, that corner
  // minimizes all rows at once and certifies infeasibility.
  bool uniform_sign = true;
  for (std::size_t j = 0; j < p.m; ++j) {
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < p.n; ++i) {
      pos |= p.b(i, j) > 0.0;
      neg |= p.b(i, j) < 0.0;
    }
    uniform_sign &= !(pos && neg);
    u[j] = neg && !pos ? p.lim.hi[j] : (pos && !neg ? p.lim.lo[j] : u[j]);
  }
  if (p.feasible(u, 0.0)) return u;
  if (uniform_sign) throw Infeasible("voltage limits cannot be met anywhere in the inverter box");
  if (!project_feasible(p, u, bound)) throw Infeasible("no feasible point found for the voltage rows");
  return u;
}

}  // namespace

double quadratic_cost(std::span<const double> q_diag, std::span<const double> u) {
  double c = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) c += 0.5 * q_diag[j] * u[j] * u[j];
  return c;
}

QpSolution solve_lcqp(std::span<const double> q_diag, const Matrix& b, std::span<const double> e,
                      std::span<const double> x_bar, const InverterLimits& limits) {
  const std::size_t n = b.rows();
  const std::size_t m = b.cols();
  if (q_diag.size() != m || e.size() != n || x_bar.size() != n || limits.size() != m) {
    throw DimensionMismatch("solve_lcqp: inconsistent problem sizes");
  }
  for (double q : q_diag)
    if (!(q > 0.0)) throw ValidationError("solve_lcqp needs a positive diagonal Q");
  validate(limits);

  const Problem prob{q_diag, b, subtract(x_bar, e), limits, n, m};

  std::vector<Bound> bound(m, Bound::none);
  for (std::size_t j = 0; j < m; ++j)
    if (limits.lo[j] == limits.hi[j]) bound[j] = Bound::fixed;

  Vector u = feasible_start(prob, bound);
  for (std::size_t j = 0; j < m; ++j) {
    if (bound[j] == Bound::fixed) {
      u[j] = limits.lo[j];
    } else if (u[j] == limits.lo[j]) {
      bound[j] = Bound::lower;
    } else if (u[j] == limits.hi[j]) {
      bound[j] = Bound::upper;
    }
  }
  std::vector<bool> in_work(n, false);  // voltage rows in the working set

  QpSolution sol;
  for (std::size_t iter = 0;; ++iter) {
    if (iter >= kMaxPivots) throw MaxPivots("active-set iteration limit reached");
    sol.iterations = iter;

    std::vector<std::size_t> free_vars;
    for (std::size_t j = 0; j < m; ++j)
      if (bound[j] == Bound::none) free_vars.push_back(j);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (in_work[i]) rows.push_back(i);

    // Equality-constrained step on the free variables. With diagonal Q the
    // KKT system reduces to the Schur complement S mu = -B_VF u_F.
    Vector mu(rows.size(), 0.0);
    if (!rows.empty()) {
      Matrix s(rows.size(), rows.size());
      Vector r(rows.size(), 0.0);
      for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t j : free_vars) r[a] -= b(rows[a], j) * u[j];
        for (std::size_t c = 0; c < rows.size(); ++c) {
          double acc = 0.0;
          for (std::size_t j : free_vars) acc += b(rows[a], j) * b(rows[c], j) / q_diag[j];
          s(a, c) = acc;
        }
      }
      try {
        mu = solve_linear(s, r);
      } catch (const SingularMatrix&) {
        throw SingularKKT("active-set working rows became dependent");
      }
    }
    Vector step(m, 0.0);
    for (std::size_t j : free_vars) {
      double btmu = 0.0;
      for (std::size_t a = 0; a < rows.size(); ++a) btmu += b(rows[a], j) * mu[a];
      step[j] = -u[j] - btmu / q_diag[j];
    }

    if (norm_inf(step) <= 1e-13 * (1.0 + norm_inf(u))) {
      // Stationary on the working set: check multiplier signs.
      Vector g(m);
      for (std::size_t j = 0; j < m; ++j) g[j] = q_diag[j] * u[j];
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t j = 0; j < m; ++j) g[j] += b(rows[a], j) * mu[a];

      // Bland: drop the lowest-index constraint with a negative multiplier.
      std::size_t drop = std::numeric_limits<std::size_t>::max();
      for (std::size_t a = 0; a < rows.size() && drop == std::numeric_limits<std::size_t>::max(); ++a)
        if (mu[a] < kDropThreshold) drop = rows[a];
      for (std::size_t j = 0; j < m && drop == std::numeric_limits<std::size_t>::max(); ++j) {
        if (bound[j] == Bound::lower && g[j] < kDropThreshold) drop = n + j;
      }
      for (std::size_t j = 0; j < m && drop == std::numeric_limits<std::size_t>::max(); ++j) {
        if (bound[j] == Bound::upper && -g[j] < kDropThreshold) drop = 3 * n + j;
      }
      if (drop == std::numeric_limits<std::size_t>::max()) {
        sol.multipliers.assign(n, 0.0);
        for (std::size_t a = 0; a < rows.size(); ++a) sol.multipliers[rows[a]] = std::max(0.0, mu[a]);
        break;
      }
      if (drop < n) {
        in_work[drop] = false;
      } else {
        bound[drop < 3 * n ? drop - n : drop - 3 * n] = Bound::none;
      }
      continue;
    }

    // Ratio test; Bland picks the lowest index among ties.
    double alpha = 1.0;
    std::size_t block = std::numeric_limits<std::size_t>::max();
    auto consider = [&](double ratio, std::size_t idx) {
      ratio = std::max(ratio, 0.0);
      if (ratio < alpha || (ratio == alpha && block != std::numeric_limits<std::size_t>::max() && idx < block)) {
        alpha = ratio;
        block = idx;
      }
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (in_work[i]) continue;
      const double rate = dot(b.row(i), step);
      if (rate > 1e-15) consider(prob.slack(i, u) / rate, i);
    }
    for (std::size_t j : free_vars) {
      if (step[j] < 0.0) consider((u[j] - limits.lo[j]) / -step[j], n + j);
      if (step[j] > 0.0) consider((limits.hi[j] - u[j]) / step[j], 3 * n + j);
    }
    for (std::size_t j : free_vars) u[j] += alpha * step[j];
    if (block != std::numeric_limits<std::size_t>::max()) {
      if (block < n) {
        in_work[block] = true;
      } else if (block < 3 * n) {
        u[block - n] = limits.lo[block - n];
        bound[block - n] = Bound::lower;
      } else {
        u[block - 3 * n] = limits.hi[block - 3 * n];
        bound[block - 3 * n] = Bound::upper;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (in_work[i] || prob.slack(i, u) <= 1e-9) sol.active_set.push_back(i);
  for (std::size_t j = 0; j < m; ++j)
    if (u[j] == limits.lo[j]) sol.active_set.push_back(n + j);
  for (std::size_t j = 0; j < m; ++j)
    if (u[j] == limits.hi[j]) sol.active_set.push_back(3 * n + j);
  sol.objective = quadratic_cost(q_diag, u);
  sol.u_star = std::move(u);
  return sol;
}

PrimalDualState primal_dual_step(const PrimalDualState& state, const PrimalDualConfig& config,
                                 const Matrix& b_hat, std::span<const double> x_measured,
                                 const InverterLimits& limits) {
  const std::size_t n = b_hat.rows();
  const std::size_t m = b_hat.cols();
  if (state.u.size() != m || state.lambda.size() != n || x_measured.size() != n ||
      config.q_diag.size() != m || config.x_bar.size() != n) {
    throw DimensionMismatch("primal_dual_step: inconsistent sizes");
  }
  Vector grad(m);
  for (std::size_t j = 0; j < m; ++j) grad[j] = config.q_diag[j] * state.u[j];
  for (std::size_t i = 0; i < n; ++i) {
    if (state.lambda[i] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) grad[j] += b_hat(i, j) * state.lambda[i];
  }
  PrimalDualState next;
  next.u = project_to_box(axpy(-config.eta_p, grad, state.u), limits);
  next.lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = state.lambda[i] +
                     config.eta_d * (x_measured[i] - config.x_bar[i] - config.eps_reg * state.lambda[i]);
    next.lambda[i] = std::max(0.0, l);
  }
  return next;
}

Trajectory run_primal_dual(const Plant& plant, const Matrix& b_hat, const PrimalDualConfig& config,
                           const InverterLimits& limits) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = plant.buses();
  Trajectory traj;
  traj.method = "primal-dual";

  const Vector x_unc = plant.measure(Vector(2 * n, 0.0));
  const std::size_t worst = most_violated(x_unc, config.x_bar);
  if (x_unc[worst] < config.x_bar[worst]) {
    traj.status = TerminalStatus::not_activated;
    traj.message = "no bus reaches its voltage limit";
    traj.steps.push_back(make_record(0, Vector(2 * n, 0.0), x_unc, config.x_bar, static_cast<int>(worst),
                                     0.0, kEventNone));
    return traj;
  }

  PrimalDualState st;
  st.u.assign(2 * n, 0.0);
  const Vector p_av = limits.p_av();
  for (std::size_t k = 0; k < n; ++k) st.u[k] = (config.kappa - 1.0) * p_av[k];
  st.u = project_to_box(st.u, limits);
  st.lambda.assign(n, 0.0);

  Vector x = plant.measure(st.u);
  auto record = [&](std::size_t k, unsigned flags) {
    const double lmax = *std::max_element(st.lambda.begin(), st.lambda.end());
    traj.steps.push_back(make_record(k, st.u, x, config.x_bar,
                                     static_cast<int>(most_violated(x, config.x_bar)), lmax, flags));
  };
  record(0, kEventInit);

  traj.status = TerminalStatus::max_iters;
  for (std::size_t k = 0; k < config.max_iterations; ++k) {
    PrimalDualState next = primal_dual_step(st, config, b_hat, x, limits);
    const double du = norm_inf(subtract(next.u, st.u));
    const double dl = norm_inf(subtract(next.lambda, st.lambda));
    st = std::move(next);
    x = plant.measure(st.u);
    record(k + 1, kEventNone);
    if (du < config.tolerance && dl < config.tolerance) {
      traj.status = TerminalStatus::converged;
      break;
    }
  }
  traj.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return traj;
}

}  // namespace gridbarrier
