from __future__ import annotations

import warnings

import numpy as np

from .._backend import get_kernels
from ..errors import ProtocolError, ShapeError


class ScheduleWarning(UserWarning):
    """A default parameter schedule is used outside its validity window."""


def warn_schedule(message: str) -> None:
    warnings.warn(message, ScheduleWarning, stacklevel=3)


def check_k(k: int) -> int:
    if k < 2:
        raise ShapeError(f"need at least 2 items, got K={k}")
    return int(k)


class Policy:
    """Sequential pair-selection policy.

    Two ways to drive a policy:

    * interactively, ``x, y = select_pair(rng)`` followed by exactly one
      ``observe(x, y, o)``;
    * in bulk, :meth:`run_block` hands a whole block of pre-drawn uniforms to
      the kernel backend, which selects, samples feedback and updates.

    Policies only ever see ``(x, y, o)``; ground-truth scores stay with the
    simulator.
    """

    kind = "abstract"

    def __init__(self, k: int, horizon: int, backend: str | None = None):
        self.k = check_k(k)
        self.horizon = int(horizon)
        self.t = 0
        self._pending: tuple[int, int] | None = None
        self._kernels = get_kernels(backend)

    # interactive protocol -------------------------------------------------

    def select_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        if self._pending is not None:
            raise ProtocolError("select_pair called twice without observe")
        pair = self._select(rng)
        self._pending = pair
        return pair

    def observe(self, x: int, y: int, o: int) -> None:
        if self._pending is None:
            raise ProtocolError("observe called without a pending select_pair")
        if (x, y) != self._pending:
            raise ProtocolError(f"observed pair {(x, y)} differs from selected {self._pending}")
        self._pending = None
        self._update(x, y, int(o))
        self.t += 1

    def _select(self, rng):
        raise NotImplementedError

    def _update(self, x, y, o):
        raise NotImplementedError

    # bulk path ------------------------------------------------------------

    def run_block(self, P, upol, uenv, xs, ys, os, **kw) -> None:
        """Play ``len(uenv)`` rounds against matrices ``P`` (shape (n, K, K)).

        ``upol`` has shape (n, 2) and drives pair selection, ``uenv`` drives
        the Bernoulli feedback. Played pairs and outcomes are written into
        ``xs``, ``ys``, ``os``.
        """
        if self._pending is not None:
            raise ProtocolError("run_block called with a pending select_pair")
        self._run_block(P, upol, uenv, xs, ys, os, **kw)
        self.t += len(uenv)

    def _run_block(self, P, upol, uenv, xs, ys, os):
        raise NotImplementedError

    # reporting ------------------------------------------------------------

    def params(self) -> dict:
        return {}

    def snapshot(self) -> dict:
        return {"kind": self.kind, "t": self.t}

    @property
    def committed(self) -> int | None:
        return None

    @property
    def commit_round(self) -> int | None:
        return None
