"""Python bindings for the csaclb C++ core."""

import json

from ._csaclb import (
    Env,
    bench_bound,
    log_barrier,
    performance_bound,
    shifted_barrier,
    shifted_barrier_grad,
    smoothed_log_barrier,
    smoothed_log_barrier_grad,
)

__all__ = [
    "Env",
    "bench_bound",
    "default_config",
    "log_barrier",
    "performance_bound",
    "resolve_config",
    "shifted_barrier",
    "shifted_barrier_grad",
    "smoothed_log_barrier",
    "smoothed_log_barrier_grad",
    "train",
]


def default_config():
    """Return the default training config as a dict."""
    from ._csaclb import default_config_json

    return json.loads(default_config_json())


def resolve_config(overrides=None):
    """Fill in defaults for a partial config and validate it."""
    from ._csaclb import resolve_config_json

    return json.loads(resolve_config_json(json.dumps(overrides or {})))


def train(config=None):
    """Train an agent. Returns a dict with the log CSV text, the checkpoint
    as a dict and step counters."""
    from ._csaclb import train_json

    out = train_json(json.dumps(config or {}))
    out["checkpoint"] = json.loads(out.pop("checkpoint_json"))
    return out
