"""Online exponential barrier voltage control on radial feeders."""

from ._gridbarrier import (
    Error,
    Network,
    ValidationFailure,
    common_path_impedance,
    parse_network,
    perturb,
    read_network,
    run_barrier,
    run_scenario,
    run_scenario_text,
    sensitivity,
    solve_lcqp,
    spectral_norm,
    synthetic_feeder,
)

__all__ = [
    "Error",
    "Network",
    "ValidationFailure",
    "common_path_impedance",
    "parse_network",
    "perturb",
    "read_network",
    "run_barrier",
    "run_scenario",
    "run_scenario_text",
    "sensitivity",
    "solve_lcqp",
    "spectral_norm",
    "synthetic_feeder",
]
