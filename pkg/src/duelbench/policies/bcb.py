"""Borda-Confidence-Bound: explore with uniform distinct pairs, then commit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParamError
from ..preference import ScoreVector
from .base import Policy, check_k


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ParamError(f"delta must lie in (0, 1), got {delta}")


@dataclass
class BcbState:
    k: int
    delta: float
    horizon: int
    cum_estimates: np.ndarray = None
    t: int = 0
    committed: int | None = None
    commit_round: int | None = None
    clamp: bool = False

    def __post_init__(self):
        check_k(self.k)
        _check_delta(self.delta)
        if self.horizon < 1:
            raise ParamError(f"horizon must be >= 1, got {self.horizon}")
        if self.cum_estimates is None:
            self.cum_estimates = np.zeros(self.k)


def _uniform_distinct(k: int, u0: float, u1: float) -> tuple[int, int]:
    x = min(int(u0 * k), k - 1)
    y = min(int(u1 * (k - 1)), k - 2)
    if y >= x:
        y += 1
    return x, y


def bcb_select(state: BcbState, rng: np.random.Generator) -> tuple[int, int]:
    """Ordered pair with ``x`` uniform and ``y`` uniform over the rest; ``(i, i)`` once committed."""
    u = rng.random(2)
    if state.committed is not None:
        return state.committed, state.committed
    return _uniform_distinct(state.k, u[0], u[1])


def bcb_estimate(x, o, K: int) -> ScoreVector:
    """``K * o`` at coordinate ``x``, zero elsewhere (batched over arrays)."""
    x, o = np.asarray(x), np.asarray(o)
    if np.any((x < 0) | (x >= K)):
        raise IndexError(f"item out of range for K={K}")
    out = np.zeros(x.shape + (K,))
    np.put_along_axis(out, x[..., None], (K * o.astype(np.float64))[..., None], axis=-1)
    return ScoreVector(out, "estimated")


def bcb_radius(t: int, K: int, T: int, delta: float) -> float:
    return 2.0 * math.sqrt(K / t * math.log(2.0 * K * T / delta))


def bcb_bounds(cum_estimates, t: int, K: int, T: int, delta: float,
               clamp: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper confidence bounds on the average Borda scores after round t.

    Unclamped by default, so bounds can leave [0, 1].
    """
    if t < 1:
        raise ParamError(f"t must be >= 1, got {t}")
    _check_delta(delta)
    rad = bcb_radius(t, K, T, delta)
    avg = np.asarray(cum_estimates, dtype=np.float64) / t
    lcb, ucb = avg - rad, avg + rad
    if clamp:
        lcb, ucb = np.maximum(lcb, 0.0), np.minimum(ucb, 1.0)
    return lcb, ucb


def bcb_commit_check(lcb, ucb) -> int | None:
    """The item whose lower bound strictly beats every other item's upper bound."""
    lcb, ucb = np.asarray(lcb), np.asarray(ucb)
    k = len(lcb)
    order = np.argsort(-ucb, kind="stable")
    i1 = order[0]
    u1, u2 = ucb[i1], (ucb[order[1]] if k > 1 else -np.inf)
    others = np.where(np.arange(k) == i1, u2, u1)
    hits = np.flatnonzero(lcb > others)
    if np.all(lcb <= ucb):
        assert len(hits) <= 1, "commit rule matched more than one item"
    return int(hits[0]) if len(hits) else None


def bcb_commit_time_bound(K: int, T: int, delta: float, Delta: float,
                          integer: bool = True) -> int | float:
    """Round by which BCB commits on a fixed-gap instance with gap ``Delta``.

    ``ceil(64 K ln(2KT/delta) / Delta**2)``; ``integer=False`` skips the ceiling.
    """
    _check_delta(delta)
    if not 0.0 < Delta <= 1.0:
        raise ParamError(f"Delta must lie in (0, 1], got {Delta}")
    v = 64.0 * K * math.log(2.0 * K * T / delta) / Delta ** 2
    return math.ceil(v) if integer else v


class BcbPolicy(Policy):
    kind = "bcb"

    def __init__(self, k: int, horizon: int, delta: float = 0.05, clamp: bool = False,
                 backend: str | None = None):
        super().__init__(k, horizon, backend)
        self.state = BcbState(self.k, float(delta), self.horizon, clamp=bool(clamp))

    def _select(self, rng):
        return bcb_select(self.state, rng)

    def _update(self, x, y, o):
        s = self.state
        s.t += 1
        if s.committed is not None:
            return
        s.cum_estimates = s.cum_estimates + bcb_estimate(x, o, s.k).values
        lcb, ucb = bcb_bounds(s.cum_estimates, s.t, s.k, s.horizon, s.delta, s.clamp)
        hit = bcb_commit_check(lcb, ucb)
        if hit is not None:
            s.committed, s.commit_round = hit, s.t

    def _run_block(self, P, upol, uenv, xs, ys, os):
        s = self.state
        committed = -1 if s.committed is None else s.committed
        t, committed, commit_round = self._kernels.bcb_block(
            s.cum_estimates, s.t, committed, s.commit_round or 0,
            s.horizon, s.delta, s.clamp, P, upol, uenv, xs, ys, os)
        s.t = t
        if committed >= 0:
            s.committed, s.commit_round = int(committed), int(commit_round)

    @property
    def committed(self):
        return self.state.committed

    @property
    def commit_round(self):
        return self.state.commit_round

    def params(self):
        return {"delta": self.state.delta, "clamp": self.state.clamp}

    def snapshot(self):
        d = super().snapshot()
        s = self.state
        b = s.cum_estimates / s.t if s.t else np.zeros(s.k)
        d.update(b_tilde=b.tolist(),
                 committed=None if s.committed is None else s.committed + 1,
                 commit_round=s.commit_round)
        return d
