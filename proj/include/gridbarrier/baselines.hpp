#pragma once

#include <vector>

#include "gridbarrier/linalg.hpp"
#include "gridbarrier/plant.hpp"
#include "gridbarrier/trajectory.hpp"

namespace gridbarrier {

// Optimum of  min 1/2 u^T Q u  s.t.  B u + e <= x_bar,  lo <= u <= hi.
//
// Constraint indices: voltage rows 0..n-1, lower bounds n..3n-1, upper
// bounds 3n..5n-1.
struct QpSolution {
  Vector u_star;
  Vector multipliers;  // voltage rows only
  std::vector<std::size_t> active_set;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Primal active-set method with Bland's rule for both adding and dropping
// constraints. Q must be diagonal and positive. Throws Infeasible when no
// point of the box satisfies the voltage rows, MaxPivots on cycling.
QpSolution solve_lcqp(std::span<const double> q_diag, const Matrix& b, std::span<const double> e,
                      std::span<const double> x_bar, const InverterLimits& limits);

double quadratic_cost(std::span<const double> q_diag, std::span<const double> u);

// Regularized online primal-dual controller used for comparison.
struct PrimalDualConfig {
  Vector q_diag;
  Vector x_bar;
  double eta_p = 0.01;
  double eta_d = 0.01;
  double eps_reg = 1e-4;
  double kappa = 0.6;  // initial action matches the barrier controller
  std::size_t max_iterations = 20000;
  double tolerance = 1e-8;
};

struct PrimalDualState {
  Vector u;
  Vector lambda;
};

// u' = clamp(u - eta_p (Q u + B_hat^T lambda))
// lambda' = max(0, lambda + eta_d (x - x_bar - eps_reg lambda))
PrimalDualState primal_dual_step(const PrimalDualState& state, const PrimalDualConfig& config,
                                 const Matrix& b_hat, std::span<const double> x_measured,
                                 const InverterLimits& limits);

// Iterates against the plant from ((kappa - 1) p_av, 0), lambda = 0, until
// both u and lambda move less than the tolerance or max_iterations is hit.
Trajectory run_primal_dual(const Plant& plant, const Matrix& b_hat, const PrimalDualConfig& config,
                           const InverterLimits& limits);

}  // namespace gridbarrier
