from pathlib import Path

import pytest

gridbarrier = pytest.importorskip("gridbarrier")

DATA = Path(__file__).resolve().parents[2] / "data"


def test_sensitivity_matches_path_sums():
    net = gridbarrier.synthetic_feeder(12, seed=4)
    model = gridbarrier.sensitivity(net)
    r, x = gridbarrier.common_path_impedance(net)
    for i in range(net.n):
        for j in range(net.n):
            assert model["r"][i][j] == pytest.approx(r[i][j], abs=1e-9)
            assert model["x"][i][j] == pytest.approx(x[i][j], abs=1e-9)
    assert max(model["e"]) == pytest.approx(0.0642)


def test_network_csv_round_trip():
    net = gridbarrier.synthetic_feeder(7, seed=2)
    again = gridbarrier.parse_network(net.to_csv())
    assert again.to_csv() == net.to_csv()


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        gridbarrier.parse_network("LINES: nope\n")
    with pytest.raises(ValueError):
        gridbarrier.read_network("/nonexistent/feeder.csv")


def test_single_bus_qp():
    out = gridbarrier.solve_lcqp([1, 1], [[0.5, 0.3]], [0.15], [0.05], [-10, -10], [10, 10])
    assert out["multipliers"][0] == pytest.approx(0.1 / 0.34, rel=1e-6)
    assert out["u"][0] == pytest.approx(-0.05 / 0.34, rel=1e-6)


def test_perturbation_reports_realized_error():
    model = gridbarrier.sensitivity(gridbarrier.synthetic_feeder(10, seed=3))
    est = gridbarrier.perturb(model["b"], "both", 0.3, seed=5)
    diff = [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(model["b"], est["b_hat"])]
    assert est["eps_b"] == pytest.approx(gridbarrier.spectral_norm(diff), rel=1e-9)
    assert est["relative_error"] == pytest.approx(est["eps_b"] / gridbarrier.spectral_norm(model["b"]), rel=1e-9)


def test_barrier_is_safe_under_model_error():
    net = gridbarrier.synthetic_feeder(8, seed=6)
    model = gridbarrier.sensitivity(net)
    est = gridbarrier.perturb(model["b"], "both", 0.3, seed=1)
    out = gridbarrier.run_barrier(net, est["b_hat"], est["eps_b"], max_iterations=50000)
    assert out["status"] == "converged"
    assert max(out["x"]) <= 0.05 + 1e-6
    assert all(v <= 0.05 + 1e-6 for v in out["max_x"][1:])


def test_bundled_scenario():
    result = gridbarrier.run_scenario(str(DATA / "feeder56.cfg"))
    methods = {m["id"]: m for m in result["methods"]}
    assert methods["no_control"]["final_max"] > result["x_bar"]
    for est in result["estimates"]:
        barrier = methods["barrier-" + est["name"]]
        pd = methods["primal_dual-" + est["name"]]
        assert barrier["final_max"] <= result["x_bar"] + 1e-6
        assert barrier["violations"] == 0
        assert pd["violations"] > 0


def test_scenario_text_errors():
    with pytest.raises(ValueError, match="betta"):
        gridbarrier.run_scenario_text("[network]\nsynthetic_n = 4\n[controller]\nbetta = 1\n")
