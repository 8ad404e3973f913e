#include "gridbarrier/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace gridbarrier {

namespace {

MethodResult static_result(std::string id, std::string method, std::string estimate,
                           const SensitivityModel& model, const Vector& q_diag,
                           std::span<const double> x_bar, Vector u, std::string status) {
  MethodResult r;
  r.id = std::move(id);
  r.method = std::move(method);
  r.estimate = std::move(estimate);
  r.status = std::move(status);
  r.x_final = measure(model, u);
  r.final_max = *std::max_element(r.x_final.begin(), r.x_final.end());
  r.cost = quadratic_cost(q_diag, u);
  r.trajectory.method = r.id;
  r.trajectory.status = TerminalStatus::converged;
  r.trajectory.steps.push_back(make_record(0, u, r.x_final, x_bar,
                                           static_cast<int>(most_violated(r.x_final, x_bar)), 0.0,
                                           kEventNone));
  r.u_final = std::move(u);
  return r;
}

MethodResult error_result(std::string id, std::string method, std::string estimate, const std::string& what) {
  MethodResult r;
  r.id = std::move(id);
  r.method = std::move(method);
  r.estimate = std::move(estimate);
  r.status = "error";
  r.message = what;
  r.final_max = std::nan("");
  r.cost = std::nan("");
  return r;
}

MethodResult online_result(std::string id, std::string method, std::string estimate, Trajectory traj,
                           const Vector& q_diag) {
  MethodResult r;
  r.id = std::move(id);
  r.method = std::move(method);
  r.estimate = std::move(estimate);
  r.status = to_string(traj.status);
  r.message = traj.message;
  r.u_final = traj.final().u;
  r.x_final = traj.final().x;
  r.final_max = traj.final().max_x;
  r.cost = quadratic_cost(q_diag, r.u_final);
  if (traj.status == TerminalStatus::converged) r.steps_to_convergence = traj.final().step;
  if (traj.status != TerminalStatus::not_activated) r.settling_step = traj.settling_step();
  r.violations = traj.violation_count(1);
  traj.method = r.id;
  r.trajectory = std::move(traj);
  return r;
}

}  // namespace

const MethodResult* ExperimentResult::find(const std::string& id) const {
  for (const MethodResult& m : methods)
    if (m.id == id) return &m;
  return nullptr;
}

RadialNetwork build_network(const Scenario& s) {
  RadialNetwork net;
  if (s.network.file) {
    net = read_network_csv(*s.network.file);
    if (s.network.overload_factor != 1.0) {
      for (BusData& b : net.buses) b.p_av *= s.network.overload_factor;
    }
  } else {
    net = generate_synthetic_feeder(s.network.synthetic_n, s.network.synthetic_seed,
                                    s.network.overload_factor);
  }
  net.v0_mag = s.network.v0_mag;
  validate(net);
  return net;
}

InverterLimits build_limits(const RadialNetwork& net, const Scenario& s) {
  return InverterLimits::from_network(net, s.limits.reactive_fraction, s.limits.upper_zero);
}

BarrierConfig barrier_config(const Scenario& s, std::size_t n) {
  const ControllerSpec& c = s.controller;
  BarrierConfig cfg = BarrierConfig::uniform(n, c.beta, c.kappa, c.c_p, c.c_q, s.x_bar_pu());
  cfg.max_iterations = c.max_iterations;
  cfg.eta_override = c.eta;
  cfg.step_scale = c.step_scale;
  cfg.tolerance = c.tolerance;
  cfg.switch_guard = c.switch_guard;
  cfg.ratchet_weights = c.ratchet_weights;
  return cfg;
}

PrimalDualConfig primal_dual_config(const Scenario& s, std::size_t n) {
  const BarrierConfig bc = barrier_config(s, n);
  PrimalDualConfig pc;
  pc.q_diag = bc.q_diag;
  pc.x_bar = bc.x_bar;
  pc.eta_p = s.baselines.pd_eta_p;
  pc.eta_d = s.baselines.pd_eta_d;
  pc.eps_reg = s.baselines.pd_reg;
  pc.kappa = s.controller.kappa;
  pc.max_iterations = s.baselines.pd_max_iterations.value_or(s.controller.max_iterations);
  pc.tolerance = s.controller.tolerance;
  return pc;
}

ModelEstimate build_estimate(const Matrix& b, const EstimateSpec& spec, EstimateReport* report) {
  ModelEstimate est;
  double magnitude = spec.magnitude;
  int transpositions = spec.transpositions;
  if (spec.target_relative_error) {
    TunedPerturbation t = tune_perturbation(b, spec.kind, *spec.target_relative_error, spec.seed);
    est = std::move(t.estimate);
    magnitude = t.magnitude;
    transpositions = t.transpositions;
  } else {
    est = perturb_model(b, spec.kind, spec.magnitude, spec.seed, spec.transpositions);
  }
  const double realized = est.relative_error;
  est.eps_b *= spec.eps_scale;
  est.relative_error *= spec.eps_scale;
  if (report) *report = EstimateReport{spec.name, est.eps_b, realized, magnitude, transpositions};
  return est;
}

ExperimentResult run_experiment(const Scenario& s) {
  validate(s);
  ExperimentResult out;
  out.scenario = s;
  out.network = build_network(s);
  out.model = build_sensitivity_model(out.network);
  out.limits = build_limits(out.network, s);
  const std::size_t n = out.network.n;
  const BarrierConfig bc = barrier_config(s, n);
  const PrimalDualConfig pc = primal_dual_config(s, n);
  const Plant plant(out.model);

  out.methods.push_back(static_result("no_control", "no_control", "", out.model, bc.q_diag, bc.x_bar,
                                      Vector(2 * n, 0.0), "evaluated"));

  if (s.baselines.lcqp) {
    try {
      QpSolution qp = solve_lcqp(bc.q_diag, out.model.b, out.model.e, bc.x_bar, out.limits);
      out.methods.push_back(static_result("lcqp_true", "lcqp_true", "", out.model, bc.q_diag, bc.x_bar,
                                          std::move(qp.u_star), "solved"));
    } catch (const Error& e) {
      out.methods.push_back(error_result("lcqp_true", "lcqp_true", "", e.what()));
    }
  }

  std::vector<EstimateSpec> specs = s.estimates;
  if (specs.empty()) {
    EstimateSpec exact;
    exact.name = "exact";
    exact.kind = PerturbationKind::parametric;
    exact.magnitude = 0.0;
    specs.push_back(exact);
  }

  for (const EstimateSpec& spec : specs) {
    EstimateReport rep;
    ModelEstimate est;
    try {
      est = build_estimate(out.model.b, spec, &rep);
    } catch (const Error& e) {
      for (const char* m : {"lcqp_hat", "barrier", "primal_dual"}) {
        out.methods.push_back(error_result(std::string(m) + "-" + spec.name, m, spec.name, e.what()));
      }
      continue;
    }
    out.estimates.push_back(rep);

    if (s.baselines.lcqp) {
      const std::string id = "lcqp_hat-" + spec.name;
      try {
        // The uncontrolled measurement is the only drop information available.
        QpSolution qp = solve_lcqp(bc.q_diag, est.b_hat, plant.measure(Vector(2 * n, 0.0)), bc.x_bar,
                                   out.limits);
        out.methods.push_back(static_result(id, "lcqp_hat", spec.name, out.model, bc.q_diag, bc.x_bar,
                                            std::move(qp.u_star), "solved"));
      } catch (const Error& e) {
        out.methods.push_back(error_result(id, "lcqp_hat", spec.name, e.what()));
      }
    }

    {
      const std::string id = "barrier-" + spec.name;
      try {
        out.methods.push_back(
            online_result(id, "barrier", spec.name, run_barrier(plant, est, bc, out.limits), bc.q_diag));
      } catch (const Error& e) {
        out.methods.push_back(error_result(id, "barrier", spec.name, e.what()));
      }
    }

    if (s.baselines.primal_dual) {
      const std::string id = "primal_dual-" + spec.name;
      try {
        out.methods.push_back(online_result(id, "primal_dual", spec.name,
                                            run_primal_dual(plant, est.b_hat, pc, out.limits), pc.q_diag));
      } catch (const Error& e) {
        out.methods.push_back(error_result(id, "primal_dual", spec.name, e.what()));
      }
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const Scenario& s, std::span<const double> magnitudes, unsigned threads) {
  validate(s);
  for (double m : magnitudes) {
    if (!(m >= 0.0 && m < 1.0)) throw ValidationError("sweep magnitudes must lie in [0, 1)");
  }
  const RadialNetwork net = build_network(s);
  const SensitivityModel model = build_sensitivity_model(net);
  const InverterLimits limits = build_limits(net, s);
  const BarrierConfig bc = barrier_config(s, net.n);
  const Plant plant(model);

  EstimateSpec tmpl;
  tmpl.kind = PerturbationKind::parametric;
  if (!s.estimates.empty()) tmpl = s.estimates.front();
  tmpl.target_relative_error.reset();

  double optimal = std::nan("");
  try {
    optimal = solve_lcqp(bc.q_diag, model.b, model.e, bc.x_bar, limits).objective;
  } catch (const Error&) {
  }

  std::vector<SweepRow> rows(magnitudes.size());
  auto work = [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.magnitude = magnitudes[k];
    EstimateSpec spec = tmpl;
    spec.magnitude = magnitudes[k];
    try {
      EstimateReport rep;
      const ModelEstimate est = build_estimate(model.b, spec, &rep);
      row.realized_error = rep.realized_error;
      row.eps_b = rep.eps_b;
      const Trajectory traj = run_barrier(plant, est, bc, limits);
      row.status = to_string(traj.status);
      row.final_max = traj.final().max_x;
      row.safe = traj.final().max_x <= s.x_bar_pu() + kViolationTolerance;
      row.cost = quadratic_cost(bc.q_diag, traj.final().u);
      row.cost_optimal = optimal;
      row.gap = optimal > 0.0 ? (row.cost - optimal) / optimal : std::nan("");
      if (traj.status == TerminalStatus::converged) row.steps_to_convergence = traj.final().step;
      row.violations = traj.violation_count(1);
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(magnitudes.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < rows.size();) work(k);
    });
  }
  for (std::size_t k; (k = next++) < rows.size();) work(k);
  for (auto& th : pool) th.join();
  return rows;
}

}  // namespace gridbarrier
