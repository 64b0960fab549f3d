"""Dueling-bandit policies behind one select/observe interface."""

from __future__ import annotations

from ..errors import ParamError
from .base import Policy, ScheduleWarning
from .baseline import UniformPolicy, uniform_baseline_select
from .bcb import (
    BcbPolicy,
    BcbState,
    bcb_bounds,
    bcb_commit_check,
    bcb_commit_time_bound,
    bcb_estimate,
    bcb_radius,
    bcb_select,
)
from .dexp3 import (
    Dexp3HpPolicy,
    Dexp3HpState,
    Dexp3Policy,
    Dexp3State,
    dexp3_default_params,
    dexp3_estimate,
    dexp3_select,
    dexp3_update,
    exp_weights,
    hp_default_params,
    hp_estimate,
)

POLICY_KINDS = ("dexp3", "dexp3_hp", "bcb", "uniform")


def make_policy(spec: dict, k: int, horizon: int, backend: str | None = None) -> Policy:
    """Build a policy from a config dict; missing parameters use the default schedules."""
    kind = spec.get("kind")
    kw = {key: spec[key] for key in spec if key != "kind"}
    try:
        if kind == "dexp3":
            return Dexp3Policy(k, horizon, kw.pop("eta", None), kw.pop("gamma", None),
                               backend=backend, **kw)
        if kind == "dexp3_hp":
            return Dexp3HpPolicy(k, horizon, backend=backend, **kw)
        if kind == "bcb":
            return BcbPolicy(k, horizon, backend=backend, **kw)
        if kind == "uniform":
            return UniformPolicy(k, horizon, backend=backend, **kw)
    except TypeError as exc:
        raise ParamError(f"bad parameters for policy {kind!r}: {exc}") from None
    raise ParamError(f"unknown policy kind {kind!r}; expected one of {POLICY_KINDS}")
