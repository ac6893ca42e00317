import csv
import io
import math

import numpy as np
import pytest

import csaclb


def test_barrier_values():
    assert csaclb.log_barrier(-1.0, 2.0) == pytest.approx(0.0)
    assert csaclb.shifted_barrier(-0.5, 3.0) == 0.0
    assert csaclb.shifted_barrier_grad(-0.5, 3.0) == 0.0
    xs = np.linspace(-2.0, 3.0, 11)
    vals = csaclb.shifted_barrier(xs, 3.0, 0.0)
    assert vals.shape == xs.shape
    assert np.all(np.diff(vals) >= 0.0)
    assert csaclb.performance_bound(2.0, 1) == pytest.approx(1.5)


def test_bench_bound():
    rows = csaclb.bench_bound([2.0], "p1")
    assert len(rows) == 1
    assert rows[0]["x_tilde"][0] == pytest.approx(0.5, abs=1e-6)
    assert rows[0]["ok"]


def test_config_defaults_and_errors():
    cfg = csaclb.default_config()
    assert cfg["batch_size"] == 256
    assert csaclb.resolve_config({}) == cfg
    with pytest.raises(ValueError, match="gama"):
        csaclb.resolve_config({"gama": 0.5})


def test_env_rollout():
    env = csaclb.Env("tilt", horizon=5)
    obs = env.reset(seed=1)
    assert obs.shape == (3,)
    assert obs[0] ** 2 + obs[1] ** 2 == pytest.approx(1.0)
    done = False
    steps = 0
    while not done:
        obs, reward, cost, done = env.step(np.zeros(1))
        assert reward <= 0.0
        assert cost in (0.0, 1.0)
        steps += 1
    assert steps == 5


def test_short_training_run_is_reproducible():
    cfg = {"env": "tilt", "total_steps": 400, "batch_size": 32, "hidden_sizes": [16, 16],
           "eval_interval": 200, "eval_episodes": 1, "horizon": 50}
    a = csaclb.train(cfg)
    b = csaclb.train(cfg)
    assert a["log_csv"] == b["log_csv"]
    assert a["env_steps"] == 400
    rows = list(csv.DictReader(io.StringIO(a["log_csv"])))
    assert [int(r["step"]) for r in rows] == [200, 400]
    assert all(math.isfinite(float(r["eval_return_mean"])) for r in rows)
    assert a["checkpoint"]["env"] == "tilt"
