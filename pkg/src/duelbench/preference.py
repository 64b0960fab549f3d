"""Preference matrices, Borda / shifted-Borda scores and per-round regret.

Items are 0-based throughout the Python API. File formats and the CLI use
1-based item labels and convert at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import AsymmetryError, DiagonalError, RangeError, ShapeError

ATOL = 1e-12

ScoreKind = Literal["borda", "shifted", "estimated"]


@dataclass(frozen=True, eq=False)
class PreferenceMatrix:
    """Validated K x K matrix of pairwise win probabilities.

    ``p[i, j]`` is the probability that item ``i`` beats item ``j``. Build it
    through :func:`validate_matrix`; the constructor does no checking.
    """

    p: np.ndarray

    @property
    def k(self) -> int:
        return self.p.shape[0]

    def to_json(self) -> dict:
        return {"k": self.k, "p": self.p.tolist()}

    @classmethod
    def from_json(cls, obj: dict, *, repair: bool = False) -> "PreferenceMatrix":
        m = validate_matrix(obj["p"], repair=repair)
        if "k" in obj and int(obj["k"]) != m.k:
            raise ShapeError(f"declared k={obj['k']} but matrix is {m.k}x{m.k}")
        return m

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PreferenceMatrix):
            return NotImplemented
        return np.array_equal(self.p, other.p)

    def __repr__(self) -> str:
        return f"PreferenceMatrix(k={self.k})"


@dataclass(frozen=True, eq=False)
class ScoreVector:
    values: np.ndarray
    kind: ScoreKind

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def validate_matrix(p, *, repair: bool = False, atol: float = ATOL) -> PreferenceMatrix:
    """Check the preference-matrix constraints and wrap ``p``.

    Parameters
    ----------
    p : array-like, shape (K, K)
    repair : bool
        Symmetrize via ``(p + (1 - p.T)) / 2`` and reset the diagonal before
        checking. Meant for matrices read from rounded decimal text.
    atol : float
        Tolerance on ``p[i, j] + p[j, i] == 1``.

    Raises
    ------
    ShapeError, RangeError, DiagonalError, AsymmetryError
    """
    a = np.asarray(p, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"preference matrix must be square, got shape {a.shape}")
    k = a.shape[0]
    if k < 2:
        raise ShapeError(f"need at least 2 items, got K={k}")
    if not np.all(np.isfinite(a)):
        raise RangeError("preference matrix has non-finite entries")
    if repair:
        a = (a + (1.0 - a.T)) / 2.0
        np.fill_diagonal(a, 0.5)
    bad = np.argwhere((a < 0.0) | (a > 1.0))
    if len(bad):
        i, j = bad[0]
        raise RangeError(f"entry ({i}, {j}) = {a[i, j]!r} outside [0, 1]")
    diag = np.diagonal(a)
    if np.any(diag != 0.5):
        i = int(np.flatnonzero(diag != 0.5)[0])
        raise DiagonalError(f"diagonal entry ({i}, {i}) = {diag[i]!r}, expected 0.5")
    dev = np.abs(a + a.T - 1.0)
    if np.any(dev > atol):
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise AsymmetryError(
            f"p({i},{j}) + p({j},{i}) = {a[i, j] + a[j, i]!r}, expected 1"
        )
    return PreferenceMatrix(_frozen(a))


def _matrix_array(m) -> np.ndarray:
    return m.p if isinstance(m, PreferenceMatrix) else np.asarray(m, dtype=np.float64)


def borda_scores(m: PreferenceMatrix) -> ScoreVector:
    """Probability that each item beats a uniformly drawn *other* item."""
    p = _matrix_array(m)
    k = p.shape[-1]
    # the diagonal is exactly 0.5, so drop it from the row sum
    return ScoreVector((p.sum(axis=-1) - 0.5) / (k - 1), "borda")


def shifted_scores(m: PreferenceMatrix) -> ScoreVector:
    """Row means of the preference matrix, self-comparison included."""
    p = _matrix_array(m)
    return ScoreVector(p.sum(axis=-1) / p.shape[-1], "shifted")


def regret_increment(b: ScoreVector | np.ndarray, i_star: int, x: int, y: int) -> float:
    """``b[i_star] - (b[x] + b[y]) / 2``; negative values are legal."""
    v = b.values if isinstance(b, ScoreVector) else np.asarray(b)
    k = len(v)
    for name, item in (("i_star", i_star), ("x", x), ("y", y)):
        if not 0 <= item < k:
            raise IndexError(f"{name}={item} out of range for K={k}")
    return float(v[i_star] - (v[x] + v[y]) / 2.0)


def hindsight_best(cumulative_borda) -> int:
    """Index of the largest cumulative score, lowest index on ties."""
    a = np.asarray(cumulative_borda, dtype=np.float64)
    if a.size == 0:
        raise ValueError("empty score array")
    return int(np.argmax(a))
