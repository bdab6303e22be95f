import math

import numpy as np
import pytest

import dglm_smc

CONFIG = """
format = dglm-config/1
model.components = lc
model.family = normal
params.W = 0.1
params.V = 1
prior.W = ig(2, 0.1)
prior.V = ig(2, 1)
filter.type = sir
filter.particles = 2000
io.record_timing = false
"""


def simulated(length=80, seed=3):
    sim = dglm_smc.simulate(CONFIG, seed=seed, length=length)
    return sim["t"], sim["y"]


def test_simulate_shapes():
    sim = dglm_smc.simulate(CONFIG, seed=1, length=30)
    assert len(sim["t"]) == 30
    assert sim["states"].shape == (1, 31)
    assert list(sim["t"]) == list(range(1, 31))


def test_filter_tracks_kalman():
    t, y = simulated()
    exact = dglm_smc.kalman_filter(CONFIG, t, y)
    run = dglm_smc.run_filter(CONFIG, t, y, seed=5)
    assert run["mean"].shape == exact["mean"].shape
    assert np.mean(np.abs(run["mean"] - exact["mean"])) < 0.1
    assert np.all(run["ess"] >= 1.0) and np.all(run["ess"] <= 2000.0)


def test_same_seed_same_answer():
    t, y = simulated()
    a = dglm_smc.run_filter(CONFIG, t, y, seed=9)
    b = dglm_smc.run_filter(CONFIG, t, y, seed=9)
    assert np.array_equal(a["mean"], b["mean"])
    assert a["meta"] == b["meta"]


def test_missing_values_and_learning_filter():
    t, y = simulated(40)
    y = list(y)
    y[10] = None
    run = dglm_smc.run_filter(CONFIG.replace("filter.type = sir", "filter.type = pl"), t, y, seed=2, particles=500)
    assert run["param_names"] == ["W_1", "V"]
    assert run["param_mean"].shape == (2, 40)
    assert np.all(run["param_mean"] > 0)


def test_loglik_estimate_near_exact():
    t, y = simulated(50)
    exact = dglm_smc.kalman_filter(CONFIG, t, y)["loglik"]
    est = dglm_smc.estimate_loglik(CONFIG, t, y, particles=5000, seed=4)
    assert abs(est - exact) < 0.5


def test_pmmh_runs():
    t, y = simulated(30)
    cfg = CONFIG + "pmmh.iterations = 200\npmmh.burn_in = 50\npmmh.particles = 100\npmmh.likelihood = kalman\n"
    out = dglm_smc.run_pmmh(cfg, t, y, seed=1)
    assert out["draws"].shape == (200, 2)
    assert 0.0 < out["acceptance_rate"] <= 1.0


def test_weights_and_resampling():
    assert dglm_smc.ess(np.zeros(10)) == pytest.approx(10.0)
    lw = dglm_smc.normalize_log_weights(np.array([-1000.0, -1001.0]))
    assert math.isclose(np.exp(lw).sum(), 1.0)
    idx = dglm_smc.resample("systematic", np.array([0.5, 0.5, 0.0, 0.0]), seed=1)
    assert sorted(idx) == [0, 0, 1, 1]
    assert dglm_smc.weighted_quantile(np.array([1.0, 2.0, 3.0]), np.ones(3), 0.5) == 2.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        dglm_smc.run_filter(CONFIG + "filter.bogus = 1\n", [1], [0.0])
    with pytest.raises(ValueError):
        dglm_smc.resample("residual", np.ones(2) / 2, seed=1)
    with pytest.raises(ArithmeticError):
        dglm_smc.normalize_log_weights(np.array([-np.inf, -np.inf]))
