import math

import pytest

import sbcm


def test_sigmoid_values():
    assert sbcm.sigmoid(0.0, 60.0) == pytest.approx(0.5)
    assert sbcm.sigmoid(0.05, 60.0) == pytest.approx(0.952574126822433219, rel=1e-14)
    assert sbcm.log_sigmoid(-500.0, 1.0) == pytest.approx(-500.0, rel=1e-12)
    assert math.isfinite(sbcm.log_sigmoid(-100.0, 100.0))


def test_validate_params_raises():
    sbcm.validate_params(0.25, 0.5, 60.0)
    with pytest.raises(ValueError):
        sbcm.validate_params(2.5, 0.1, 10.0)
    with pytest.raises(ValueError):
        sbcm.validate_params(1.0, 0.6, 10.0)


def test_simulate_is_deterministic_and_replayable():
    a = sbcm.simulate(10, 200, 0.5, 0.2, 20.0, seed=42)
    b = sbcm.simulate(10, 200, 0.5, 0.2, 20.0, seed=42)
    assert a == b
    assert 0 <= a["num_successes"] <= 200

    dense = sbcm.simulate(10, 200, 0.5, 0.2, 20.0, seed=42, dense_states=True)
    states = sbcm.replay(a["x0"], a["schedule"], a["outcomes"], 0.2)
    assert states == dense["states"]
    assert all(-1.0 <= x <= 1.0 for row in states for x in row)


def test_epsilon_estimation_recovers_truth():
    t = sbcm.simulate(100, 5000, 0.4, 0.05, 60.0, seed=11)
    rep = sbcm.estimate_epsilon(t["x0"], t["schedule"], t["outcomes"], 0.05, 60.0)
    assert rep["converged"]
    assert rep["existence"] == "interior"
    assert abs(rep["estimate"] - 0.4) < 0.05
    assert abs(rep["score_residual"]) <= 1e-8

    d = sbcm.distances_for(t["x0"], t["schedule"], t["outcomes"], 0.05)
    assert sbcm.score_epsilon(rep["estimate"], d, t["outcomes"], 60.0) == pytest.approx(
        0.0, abs=1e-8
    )
    assert sbcm.curvature_epsilon(rep["estimate"], d, 60.0) < 0.0


def test_mu_and_joint_estimation():
    t = sbcm.simulate(50, 4000, 0.3, 0.3, 60.0, seed=7)
    rep = sbcm.estimate_mu(t["x0"], t["schedule"], t["outcomes"], 0.3, 60.0)
    assert rep["converged"]
    assert abs(rep["estimate"] - 0.3) < 0.05

    joint = sbcm.estimate_joint(t["x0"], t["schedule"], t["outcomes"], 60.0)
    assert joint["converged"]
    assert joint["local_minima"]
    truth_nll = -sbcm.log_likelihood(
        0.3, 0.3, t["x0"], t["schedule"], t["outcomes"], 60.0
    )
    assert joint["nll_at_estimate"] <= truth_nll + 1e-9


def test_two_agent_oracle_mass_and_bound():
    dist = sbcm.two_agent_oracle(-0.35, 0.3, 0.45, 0.25, 8.0, 3)
    total = sum(p["probability"] for p in dist["paths"])
    assert total == pytest.approx(1.0, abs=1e-12)
    assert len(dist["x1_distribution"]) == 4

    kappas = [0.4, 0.5, 0.6]
    rep = sbcm.bias_variance_report(kappas, 10.0)
    assert rep["variance"] * rep["fisher_information"] == pytest.approx(1.0)
    assert rep["bound"] == pytest.approx(sbcm.bias_bound(10.0, 3))


def test_rho_sweep_decays():
    rows = sbcm.rho_sweep()
    bias = [abs(b) for _, b, _ in rows]
    assert all(b2 < b1 for b1, b2 in zip(bias[:-2], bias[1:-1]))
    assert bias[-1] < 1e-9
