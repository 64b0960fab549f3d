"""Ground-truth regret bookkeeping.

The hindsight winner is only known once the last round is in, so the trace
keeps, for every item ``j``, the running total of ``b_t(j) - pair_t`` where
``pair_t = (b_t(x_t) + b_t(y_t)) / 2``. Once the winner ``i*`` is resolved,
the cumulative regret is simply the ``i*`` entry. Memory is O(K) plus O(K)
per checkpoint plus one fixed-size chunk buffer, independent of the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonError, IncompleteTrace, ParamError
from .preference import ScoreVector, hindsight_best

CHUNK = 1 << 16


class _Compensated:
    """Kahan-compensated running sum of vectors."""

    __slots__ = ("s", "c")

    def __init__(self, k: int):
        self.s = np.zeros(k)
        self.c = np.zeros(k)

    def add(self, v: np.ndarray) -> None:
        y = v - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t

    def peek(self, v: np.ndarray) -> np.ndarray:
        return self.s + (v - self.c)


@dataclass(frozen=True)
class CheckpointRow:
    t: int
    x: int
    y: int
    o: int
    r_t: float
    R_t: float
    R_s_t: float
    diag: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RegretResult:
    horizon: int
    k: int
    i_star: int
    R_T: float
    R_T_shifted: float
    cum_borda: np.ndarray
    checkpoints: list[CheckpointRow]
    segment_start: int | None = None
    segment_regret: float | None = None

    def identity_gap(self) -> float:
        """``|R_T - K/(K-1) R^s_T|``; zero up to rounding."""
        return abs(self.R_T - self.k / (self.k - 1) * self.R_T_shifted)


@dataclass
class _Snapshot:
    t: int
    x: int
    y: int
    o: int
    D: np.ndarray
    Ds: np.ndarray
    b: np.ndarray
    s: np.ndarray
    pair: float
    pair_s: float
    diag: dict


class RegretTrace:
    """Accumulates one run's regret against every candidate winner.

    Parameters
    ----------
    k, horizon : int
    checkpoints : iterable of int
        1-based rounds at which a row of the output series is kept.
    """

    def __init__(self, k: int, horizon: int, checkpoints=()):
        if horizon < 1:
            raise ParamError(f"horizon must be >= 1, got {horizon}")
        self.k = int(k)
        self.horizon = int(horizon)
        cps = np.unique(np.asarray(list(checkpoints), dtype=np.int64))
        if len(cps) and (cps[0] < 1 or cps[-1] > horizon):
            raise ParamError(f"checkpoints must lie in 1..{horizon}")
        self._cps = cps
        self._next_cp = 0
        self.t = 0
        self._cum_b = _Compensated(k)
        self._d = _Compensated(k)
        self._ds = _Compensated(k)
        self._seg_start: int | None = None
        self._seg: _Compensated | None = None
        self._rows: list[_Snapshot] = []
        self._chunk = CHUNK
        self._buf: np.ndarray | None = None
        self.pending_diag: dict = {}

    @property
    def checkpoints(self) -> np.ndarray:
        return self._cps

    def mark_segment(self, after_round: int) -> None:
        """Also accumulate rounds ``after_round + 1 ..`` into a separate total.

        The simulator uses this for the post-commit phase of BCB; with the
        committed item equal to the winner every addend is exactly zero.
        """
        if after_round < self.t:
            raise ParamError(f"segment start {after_round} precedes recorded round {self.t}")
        if self._seg_start is not None:
            raise ParamError("segment already marked")
        self._seg_start = int(after_round)
        self._seg = _Compensated(self.k)

    def record_round(self, b_t: ScoreVector, s_t: ScoreVector, x: int, y: int, o: int) -> None:
        b = np.asarray(getattr(b_t, "values", b_t), dtype=np.float64)[None, :]
        s = np.asarray(getattr(s_t, "values", s_t), dtype=np.float64)[None, :]
        for item in (x, y):
            if not 0 <= item < self.k:
                raise IndexError(f"item {item} out of range for K={self.k}")
        self.record_block(b, s, np.array([x]), np.array([y]), np.array([o]))

    def record_block(self, B: np.ndarray, S: np.ndarray, xs, ys, os) -> None:
        """Record ``n`` consecutive rounds given per-round Borda and shifted scores.

        Rows are buffered into chunks aligned to round 0 and summed per chunk,
        so totals do not depend on how the caller splits the horizon.
        """
        n = len(xs)
        if self.t + n > self.horizon:
            raise HorizonError(f"recording rounds past horizon {self.horizon}")
        xs = np.asarray(xs, dtype=np.intp)
        ys = np.asarray(ys, dtype=np.intp)
        i = 0
        while i < n:
            pos = self.t % self._chunk
            take = min(n - i, self._chunk - pos)
            self._buffer(B[i:i + take], S[i:i + take], xs[i:i + take], ys[i:i + take],
                         os[i:i + take], pos)
            self.t += take
            i += take
            if self.t % self._chunk == 0 or self.t == self.horizon:
                self._flush(pos + take)

    def _buffer(self, B, S, xs, ys, os, pos: int) -> None:
        n = len(xs)
        if self._buf is None:
            self._buf = np.empty((3, min(self._chunk, self.horizon), self.k))
        bb, bd, bds = self._buf
        ar = np.arange(n)
        pair = 0.5 * (B[ar, xs] + B[ar, ys])
        pair_s = 0.5 * (S[ar, xs] + S[ar, ys])
        bb[pos:pos + n] = B
        np.subtract(B, pair[:, None], out=bd[pos:pos + n])
        np.subtract(S, pair_s[:, None], out=bds[pos:pos + n])

        t0 = self.t
        cps = self._cps
        while self._next_cp < len(cps) and cps[self._next_cp] <= t0 + n:
            j = int(cps[self._next_cp]) - t0 - 1
            upto = pos + j + 1
            self._rows.append(_Snapshot(
                t=t0 + j + 1, x=int(xs[j]), y=int(ys[j]), o=int(os[j]),
                D=self._d.peek(bd[:upto].sum(axis=0)),
                Ds=self._ds.peek(bds[:upto].sum(axis=0)),
                b=np.array(B[j]), s=np.array(S[j]),
                pair=float(pair[j]), pair_s=float(pair_s[j]),
                diag=dict(self.pending_diag),
            ))
            self._next_cp += 1

    def _flush(self, m: int) -> None:
        bb, bd, bds = self._buf
        start = self.t - m
        self._cum_b.add(bb[:m].sum(axis=0))
        self._d.add(bd[:m].sum(axis=0))
        self._ds.add(bds[:m].sum(axis=0))
        if self._seg is not None and self._seg_start < self.t:
            self._seg.add(bd[max(0, self._seg_start - start):m].sum(axis=0))

    def finalize(self) -> RegretResult:
        if self.t != self.horizon:
            raise IncompleteTrace(f"recorded {self.t} of {self.horizon} rounds")
        i_star = hindsight_best(self._cum_b.s)
        rows = [
            CheckpointRow(
                t=r.t, x=r.x, y=r.y, o=r.o,
                r_t=float(r.b[i_star] - r.pair),
                R_t=float(r.D[i_star]),
                R_s_t=float(r.Ds[i_star]),
                diag=r.diag,
            )
            for r in self._rows
        ]
        seg = None if self._seg is None else float(self._seg.s[i_star])
        return RegretResult(
            horizon=self.horizon, k=self.k, i_star=i_star,
            R_T=float(self._d.s[i_star]), R_T_shifted=float(self._ds.s[i_star]),
            cum_borda=self._cum_b.s.copy(), checkpoints=rows,
            segment_start=self._seg_start, segment_regret=seg,
        )
