"""Dueling-EXP3 and its high-probability variant.

Both keep exponential weights over cumulative importance-weighted estimates
of the shifted Borda score, mixed with ``gamma``-uniform exploration. The
variant adds ``beta / q(i)`` to every coordinate of every estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._kernels_py import _categorical
from ..errors import DegenerateDistribution, ParamError
from ..preference import ScoreVector
from .base import Policy, check_k, warn_schedule


def dexp3_default_params(K: int, T: int) -> tuple[float, float]:
    """Learning rate and exploration for horizon T.

    ``eta = (ln K / (T sqrt K)) ** (2/3)`` and ``gamma = sqrt(eta K)``.
    """
    check_k(K)
    if T < 1:
        raise ParamError(f"T must be >= 1, got {T}")
    if T < K * math.log(K):
        warn_schedule(f"T={T} < K log K={K * math.log(K):.1f}; gamma may exceed 1")
    eta = (math.log(K) / (T * math.sqrt(K))) ** (2.0 / 3.0)
    gamma = math.sqrt(eta * K)
    if gamma > 1.0:
        raise ParamError(f"default schedule gives gamma={gamma:.4g} > 1 for K={K}, T={T}")
    return eta, gamma


def hp_default_params(K: int, T: int, delta: float) -> tuple[float, float, float]:
    """``(eta, gamma, beta)`` for the high-probability variant."""
    check_k(K)
    if T < 1:
        raise ParamError(f"T must be >= 1, got {T}")
    if not 0.0 < delta < 1.0:
        raise ParamError(f"delta must lie in (0, 1), got {delta}")
    if T < 2 * K * math.log(K):
        warn_schedule(f"T={T} < 2K log K={2 * K * math.log(K):.1f}; gamma may exceed 1")
    eta = (math.log(K) / (T * math.sqrt(2 * K))) ** (2.0 / 3.0)
    gamma = math.sqrt(2 * eta * K)
    beta = T ** -0.5 * math.sqrt(math.log(K / delta)) / ((2 * eta) ** 0.25 * K ** 0.75)
    if gamma > 1.0:
        raise ParamError(f"default schedule gives gamma={gamma:.4g} > 1 for K={K}, T={T}")
    if not 0.0 < beta < 1.0:
        raise ParamError(f"default schedule gives beta={beta:.4g} outside (0, 1)")
    return eta, gamma, beta


def _check_estimate_args(q, x, y, o) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=np.float64)
    if np.any(q <= 0.0):
        raise DegenerateDistribution("sampling distribution must be strictly positive")
    k = len(q)
    x, y, o = np.asarray(x), np.asarray(y), np.asarray(o)
    if np.any((x < 0) | (x >= k)) or np.any((y < 0) | (y >= k)):
        raise IndexError(f"item out of range for K={k}")
    if np.any((o != 0) & (o != 1)):
        raise ValueError("feedback must be 0 or 1")
    return q, x, y, o


def dexp3_estimate(q, x, y, o) -> ScoreVector:
    """Importance-weighted shifted-Borda estimate.

    Coordinate ``x`` equals ``o / (K q[x] q[y])``, every other coordinate is
    zero. ``x``, ``y``, ``o`` may be equal-length arrays, in which case the
    values have shape ``(N, K)``.
    """
    q, x, y, o = _check_estimate_args(q, x, y, o)
    k = len(q)
    out = np.zeros(x.shape + (k,))
    val = o / (k * q[x] * q[y])
    np.put_along_axis(out, x[..., None], np.asarray(val)[..., None], axis=-1)
    return ScoreVector(out, "estimated")


def hp_estimate(q, x, y, o, beta: float) -> ScoreVector:
    """:func:`dexp3_estimate` plus ``beta / q(i)`` on every coordinate."""
    if not 0.0 <= beta < 1.0:
        raise ParamError(f"beta must lie in [0, 1), got {beta}")
    base = dexp3_estimate(q, x, y, o).values
    q = np.asarray(q, dtype=np.float64)
    return ScoreVector(base + beta / q, "estimated")


def exp_weights(cum_scores, eta: float, gamma: float) -> np.ndarray:
    """Exponential weights on ``eta * cum_scores`` mixed with uniform exploration.

    The maximum is subtracted before exponentiating, so the result does not
    overflow however large the cumulative scores grow.
    """
    z = eta * np.asarray(cum_scores, dtype=np.float64)
    w = np.exp(z - z.max())
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("exponential weights overflowed")
    k = len(w)
    return (1.0 - gamma) * (w / w.sum()) + gamma / k


@dataclass
class Dexp3State:
    k: int
    eta: float
    gamma: float
    cum_scores: np.ndarray = None
    q: np.ndarray = None
    t: int = 0

    def __post_init__(self):
        check_k(self.k)
        if self.eta <= 0:
            raise ParamError(f"eta must be > 0, got {self.eta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ParamError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.cum_scores is None:
            self.cum_scores = np.zeros(self.k)
        if self.q is None:
            self.q = np.full(self.k, 1.0 / self.k)


@dataclass
class Dexp3HpState(Dexp3State):
    beta: float = 0.0
    delta: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.beta < 1.0:
            raise ParamError(f"beta must lie in (0, 1), got {self.beta}")


def dexp3_update(state: Dexp3State, estimate: ScoreVector) -> Dexp3State:
    """Add one round's estimate to the cumulative scores and refresh ``q``."""
    state.cum_scores = state.cum_scores + np.asarray(estimate.values, dtype=np.float64)
    state.q = exp_weights(state.cum_scores, state.eta, state.gamma)
    state.t += 1
    return state


def dexp3_select(state: Dexp3State, rng: np.random.Generator) -> tuple[int, int]:
    """Two i.i.d. draws from ``state.q`` (so ``x == y`` can happen)."""
    u = rng.random(2)
    q = state.q.tolist()
    return _categorical(q, state.k, u[0]), _categorical(q, state.k, u[1])


class Dexp3Policy(Policy):
    kind = "dexp3"

    def __init__(self, k: int, horizon: int, eta: float | None = None,
                 gamma: float | None = None, backend: str | None = None):
        super().__init__(k, horizon, backend)
        if eta is None or gamma is None:
            d_eta, d_gamma = dexp3_default_params(k, horizon)
            eta = d_eta if eta is None else eta
            gamma = d_gamma if gamma is None else gamma
        self.state = self._make_state(eta, gamma)

    def _make_state(self, eta, gamma):
        return Dexp3State(self.k, float(eta), float(gamma))

    @property
    def beta(self) -> float:
        return 0.0

    def _select(self, rng):
        return dexp3_select(self.state, rng)

    def _estimate(self, x, y, o):
        return dexp3_estimate(self.state.q, x, y, o)

    def _update(self, x, y, o):
        dexp3_update(self.state, self._estimate(x, y, o))

    def _run_block(self, P, upol, uenv, xs, ys, os, reset_every: int = 0):
        s = self.state
        self._kernels.exp_weights_block(s.cum_scores, s.q, s.eta, s.gamma, self.beta,
                                        P, upol, uenv, xs, ys, os, self.t, reset_every)
        s.t += len(uenv)

    def params(self):
        return {"eta": self.state.eta, "gamma": self.state.gamma}

    def snapshot(self):
        d = super().snapshot()
        d.update(q=self.state.q.tolist(), cum_scores=self.state.cum_scores.tolist())
        return d


class Dexp3HpPolicy(Dexp3Policy):
    kind = "dexp3_hp"

    def __init__(self, k: int, horizon: int, delta: float = 0.05, eta: float | None = None,
                 gamma: float | None = None, beta: float | None = None,
                 backend: str | None = None):
        if eta is None or gamma is None or beta is None:
            d = hp_default_params(k, horizon, delta)
            eta = d[0] if eta is None else eta
            gamma = d[1] if gamma is None else gamma
            beta = d[2] if beta is None else beta
        self._beta, self._delta = float(beta), float(delta)
        super().__init__(k, horizon, eta, gamma, backend)

    def _make_state(self, eta, gamma):
        return Dexp3HpState(self.k, float(eta), float(gamma), beta=self._beta, delta=self._delta)

    @property
    def beta(self) -> float:
        return self.state.beta

    def _estimate(self, x, y, o):
        return hp_estimate(self.state.q, x, y, o, self.state.beta)

    def params(self):
        return {"eta": self.state.eta, "gamma": self.state.gamma,
                "beta": self.state.beta, "delta": self.state.delta}
