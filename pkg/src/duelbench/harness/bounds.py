"""Closed-form regret bounds evaluated along a run's checkpoints."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParamError

BOUND_LABELS = {
    "dexp3": "6 (K ln K)^(1/3) t^(2/3)",
    "dexp3_hp": "2 (3 (2 ln K)^(1/3) + 2^(5/6) sqrt(ln(K/delta)) / (ln K)^(1/6)) K^(1/3) t^(2/3)"
                "  [explicit constant of the O~(K^(1/3) T^(2/3)) high-probability bound]",
    "bcb": "64 (K / Delta^2) ln(2 K T / delta)",
}


def hp_bound_constant(K: int, delta: float) -> float:
    lk = math.log(K)
    return 2.0 * (3.0 * (2.0 * lk) ** (1 / 3) + 2 ** (5 / 6) * math.sqrt(math.log(K / delta)) / lk ** (1 / 6))


def bound_curve(policy_kind: str, K: int, T: int, delta: float | None = None,
                Delta: float | None = None, checkpoints=None) -> np.ndarray:
    """Regret bound of ``policy_kind`` at each checkpoint (default: just ``T``).

    The D-EXP3 bounds substitute the checkpoint round for the horizon; the BCB
    bound does not depend on the round.
    """
    if K < 2:
        raise ParamError(f"K must be >= 2, got {K}")
    t = np.asarray([T] if checkpoints is None else list(checkpoints), dtype=np.float64)
    if np.any(t < 1):
        raise ParamError("checkpoints must be >= 1")
    if policy_kind == "dexp3":
        return 6.0 * (K * math.log(K)) ** (1 / 3) * t ** (2 / 3)
    if policy_kind == "dexp3_hp":
        if delta is None or not 0.0 < delta < 1.0:
            raise ParamError(f"delta must lie in (0, 1), got {delta}")
        return hp_bound_constant(K, delta) * K ** (1 / 3) * t ** (2 / 3)
    if policy_kind == "bcb":
        if delta is None or not 0.0 < delta < 1.0:
            raise ParamError(f"delta must lie in (0, 1), got {delta}")
        if Delta is None or not 0.0 < Delta <= 1.0:
            raise ParamError(f"Delta must lie in (0, 1], got {Delta}")
        return np.full(t.shape, 64.0 * K / Delta ** 2 * math.log(2.0 * K * T / delta))
    raise ParamError(f"no regret bound for policy kind {policy_kind!r}")
