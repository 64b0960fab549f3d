"""Obliviously fixed sequences of preference matrices.

A stream is fully determined by its construction arguments: ``matrix_at(t)``
is a pure function of ``t`` and nothing the learner does can reach the
generator. Rounds are 1-based in ``matrix_at``; ``block`` takes a 0-based
offset because that is what the simulator iterates over.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    GapViolation,
    HorizonError,
    ParamError,
    ParseError,
    ValidationError,
)
from .preference import PreferenceMatrix, borda_scores, shifted_scores, validate_matrix

_SCAN_CHUNK = 1 << 15


class EnvironmentStream:
    """Base class. Subclasses implement :meth:`_matrices`."""

    #: True when every round shares one matrix; lets callers skip per-round work.
    stationary = False

    def __init__(self, horizon: int, k: int, label: str):
        if horizon < 1:
            raise ParamError(f"horizon must be >= 1, got {horizon}")
        self.horizon = int(horizon)
        self.k = int(k)
        self.label = label

    def _matrices(self, r0: int, n: int) -> np.ndarray:
        raise NotImplementedError

    def _check_range(self, r0: int, n: int) -> None:
        if r0 < 0 or n < 0 or r0 + n > self.horizon:
            raise HorizonError(
                f"rounds {r0 + 1}..{r0 + n} outside horizon 1..{self.horizon}"
            )

    def matrix_at(self, t: int) -> PreferenceMatrix:
        self._check_range(t - 1, 1)
        p = np.array(self._matrices(t - 1, 1)[0])
        p.setflags(write=False)
        return PreferenceMatrix(p)

    def block(self, r0: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Matrices, Borda scores and shifted scores for rounds ``r0+1 .. r0+n``.

        Returns arrays of shape ``(n, K, K)``, ``(n, K)``, ``(n, K)``. They may
        be read-only broadcast views.
        """
        self._check_range(r0, n)
        p = self._matrices(r0, n)
        return p, borda_scores(p).values, shifted_scores(p).values

    def describe(self) -> dict:
        return {"label": self.label, "k": self.k, "horizon": self.horizon}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, k={self.k}, horizon={self.horizon})"


class StationaryStream(EnvironmentStream):
    stationary = True

    def __init__(self, m: PreferenceMatrix, horizon: int, label: str = "stationary"):
        super().__init__(horizon, m.k, label)
        self.matrix = m
        self._b = borda_scores(m).values
        self._s = shifted_scores(m).values

    def _matrices(self, r0, n):
        return np.broadcast_to(self.matrix.p, (n, self.k, self.k))

    def block(self, r0, n):
        self._check_range(r0, n)
        k = self.k
        return (
            np.broadcast_to(self.matrix.p, (n, k, k)),
            np.broadcast_to(self._b, (n, k)),
            np.broadcast_to(self._s, (n, k)),
        )


class PerturbedStream(EnvironmentStream):
    """Base matrix plus seeded antisymmetric noise, generated page by page.

    Round ``t`` lives on page ``(t - 1) // page_size``; each page draws its
    noise from ``default_rng([seed, page])`` so any round can be regenerated
    without replaying earlier ones.
    """

    page_size = 1024

    def __init__(self, base: PreferenceMatrix, scale: float, seed: int, horizon: int,
                 label: str = "perturbed", clip: tuple[float, float] = (0.02, 0.98)):
        super().__init__(horizon, base.k, label)
        if scale < 0:
            raise ParamError(f"perturbation scale must be >= 0, got {scale}")
        self.base = base
        self.scale = float(scale)
        self.seed = int(seed)
        self.clip = clip
        self._iu = np.triu_indices(self.k, 1)
        self._page_cache: tuple[int, np.ndarray] | None = None

    def _page(self, page: int) -> np.ndarray:
        if self._page_cache is not None and self._page_cache[0] == page:
            return self._page_cache[1]
        k = self.k
        iu, ju = self._iu
        rng = np.random.default_rng([self.seed, page])
        noise = rng.uniform(-self.scale, self.scale, size=(self.page_size, len(iu)))
        upper = np.clip(self.base.p[iu, ju] + noise, *self.clip)
        p = np.full((self.page_size, k, k), 0.5)
        p[:, iu, ju] = upper
        p[:, ju, iu] = 1.0 - upper
        self._page_cache = (page, p)
        return p

    def _matrices(self, r0, n):
        if self.scale == 0.0:
            return np.broadcast_to(self.base.p, (n, self.k, self.k))
        out = np.empty((n, self.k, self.k))
        done = 0
        while done < n:
            r = r0 + done
            page, off = divmod(r, self.page_size)
            take = min(self.page_size - off, n - done)
            out[done:done + take] = self._page(page)[off:off + take]
            done += take
        return out

    def describe(self):
        d = super().describe()
        d.update(scale=self.scale, seed=self.seed, base=self.base.p.tolist())
        return d


class SequenceStream(EnvironmentStream):
    """Replays an explicit list of matrices, optionally cycling."""

    def __init__(self, matrices: list[PreferenceMatrix], horizon: int,
                 cycle: bool = False, label: str = "sequence"):
        if not matrices:
            raise ParamError("empty matrix sequence")
        k = matrices[0].k
        if any(m.k != k for m in matrices):
            raise ValidationError("matrices in a sequence must share K")
        if not cycle and len(matrices) < horizon:
            raise HorizonError(
                f"sequence holds {len(matrices)} matrices but horizon is {horizon} "
                "and cycling is off"
            )
        super().__init__(horizon, k, label)
        self.cycle = cycle
        self._stack = np.stack([m.p for m in matrices])
        self._stack.setflags(write=False)

    def _matrices(self, r0, n):
        idx = np.arange(r0, r0 + n) % len(self._stack)
        return self._stack[idx]


# ---------------------------------------------------------------------------
# constructors


def stationary_env(m: PreferenceMatrix, T: int) -> StationaryStream:
    return StationaryStream(m, T)


def lower_bound_instance(K: int, epsilon: float, m: int = 0) -> PreferenceMatrix:
    """Block instance with K/2 good and K/2 bad items.

    Good items beat bad ones with probability 0.9, ties within a block are
    0.5. For ``m >= 1`` the m-th good item (1-based, i.e. row ``m - 1``)
    beats every bad item with probability ``0.9 + epsilon``. ``m = 0`` gives
    the unperturbed instance where all good items tie.
    """
    if K % 2 or K < 4:
        raise ParamError(f"K must be an even integer >= 4, got {K}")
    if not 0.0 < epsilon <= 0.1:
        raise ParamError(f"epsilon must lie in (0, 0.1], got {epsilon}")
    half = K // 2
    if not 0 <= m <= half:
        raise ParamError(f"m must lie in 0..{half}, got {m}")
    p = np.full((K, K), 0.5)
    p[:half, half:] = 0.9
    p[half:, :half] = 0.1
    if m >= 1:
        p[m - 1, half:] = 0.9 + epsilon
        p[half:, m - 1] = 1.0 - (0.9 + epsilon)
    return validate_matrix(p)


def tuned_epsilon(K: int, T: int, c: float = 1.0) -> float:
    """Perturbation size ``min(0.1, c * (K / T) ** (1/3))`` for horizon T."""
    if T < K:
        raise ParamError(f"need T >= K, got T={T}, K={K}")
    return min(0.1, c * (K / T) ** (1.0 / 3.0))


@dataclass(frozen=True)
class FixedGapCertificate:
    i_star: int
    delta: float
    min_observed_gap: float
    verified_through: int
    valid: bool
    first_violation: int | None = None

    def to_json(self) -> dict:
        return {
            "i_star": self.i_star + 1,
            "delta": self.delta,
            "min_observed_gap": self.min_observed_gap,
            "verified_through": self.verified_through,
            "valid": self.valid,
            "first_violation": self.first_violation,
        }


def check_fixed_gap(stream: EnvironmentStream, i_star: int, delta: float) -> FixedGapCertificate:
    """Scan every round and track the running-average Borda gap of ``i_star``.

    The gap at round t is ``avg_t(i_star) - max_{j != i_star} avg_t(j)`` where
    ``avg_t`` is the mean Borda score over rounds 1..t.
    """
    k, T = stream.k, stream.horizon
    if not 0 <= i_star < k:
        raise IndexError(f"i_star={i_star} out of range for K={k}")
    others = np.arange(k) != i_star
    if stream.stationary:
        b = stream.block(0, 1)[1][0]
        min_gap = float(b[i_star] - b[others].max())
        first = None if min_gap >= delta else 1
        return FixedGapCertificate(i_star, delta, min_gap, T, first is None, first)

    cum = np.zeros(k)
    min_gap = math.inf
    first = None
    for r0 in range(0, T, _SCAN_CHUNK):
        n = min(_SCAN_CHUNK, T - r0)
        b = stream.block(r0, n)[1]
        run = cum + np.cumsum(b, axis=0)
        avg = run / np.arange(r0 + 1, r0 + n + 1)[:, None]
        gap = avg[:, i_star] - avg[:, others].max(axis=1)
        min_gap = min(min_gap, float(gap.min()))
        if first is None:
            bad = np.flatnonzero(gap < delta)
            if len(bad):
                first = r0 + int(bad[0]) + 1
        cum = run[-1]
    return FixedGapCertificate(i_star, delta, min_gap, T, first is None, first)


def fixed_gap_base(K: int, delta: float) -> PreferenceMatrix:
    """Item 0 beats everyone with ``0.5 + a``, all other pairs tie.

    ``a = 2 * delta * (K - 1) / K`` puts item 0's instantaneous Borda score
    exactly ``2 * delta`` above every other item.
    """
    a = 2.0 * delta * (K - 1) / K
    p = np.full((K, K), 0.5)
    p[0, 1:] = 0.5 + a
    p[1:, 0] = 0.5 - a
    return validate_matrix(p)


def fixed_gap_env(K: int, delta: float, T: int, perturbation_scale: float = 0.0,
                  seed: int = 0) -> tuple[PerturbedStream, FixedGapCertificate]:
    """Drifting stream whose running averages keep item 0 ahead by ``delta``.

    The stream is generated first and certified afterwards; a failed scan
    raises :class:`GapViolation` naming the first offending round.
    """
    if K < 2:
        raise ParamError(f"K must be >= 2, got {K}")
    if not 0.0 < delta < 0.5:
        raise ParamError(f"delta must lie in (0, 0.5), got {delta}")
    # base entries must stay inside the clip range [0.02, 0.98]
    if 2.0 * delta * (K - 1) / K > 0.48:
        raise ParamError(
            f"delta={delta} too large for K={K}; need delta <= {0.24 * K / (K - 1):.4f}"
        )
    stream = PerturbedStream(fixed_gap_base(K, delta), perturbation_scale, seed, T,
                             label=f"fixed_gap(K={K},delta={delta},scale={perturbation_scale},seed={seed})")
    cert = check_fixed_gap(stream, 0, delta)
    if not cert.valid:
        raise GapViolation(
            f"running-average gap fell to {cert.min_observed_gap:.6g} < {delta} "
            f"(first at round {cert.first_violation})",
            first_violation=cert.first_violation,
        )
    return stream, cert


# ---------------------------------------------------------------------------
# files


def _parse_matrix(obj, idx: int) -> PreferenceMatrix:
    raw = obj["p"] if isinstance(obj, dict) else obj
    try:
        m = validate_matrix(raw)
    except ValidationError as exc:
        raise type(exc)(str(exc), round=idx) from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"round {idx}: {exc}") from None
    if isinstance(obj, dict) and "k" in obj and int(obj["k"]) != m.k:
        raise ValidationError(f"declared k={obj['k']} but matrix is {m.k}x{m.k}", round=idx)
    return m


def load_sequence(path) -> tuple[list[PreferenceMatrix], bool]:
    """Read a sequence file: ``{"k": K, "cycle": bool, "matrices": [...]}``.

    A bare single-matrix object ``{"k": K, "p": [[...]]}`` is also accepted.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    if "matrices" in doc:
        raw = doc["matrices"]
    elif "p" in doc:
        raw = [doc]
    else:
        raise ParseError(f"{path}: expected a 'matrices' array or a 'p' matrix")
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{path}: 'matrices' must be a non-empty array")
    matrices = [_parse_matrix(obj, i + 1) for i, obj in enumerate(raw)]
    if "k" in doc and any(m.k != int(doc["k"]) for m in matrices):
        bad = next(i for i, m in enumerate(matrices) if m.k != int(doc["k"]))
        raise ValidationError(f"header k={doc['k']} disagrees with matrix size", round=bad + 1)
    return matrices, bool(doc.get("cycle", False))


def save_sequence(path, matrices: list[PreferenceMatrix], cycle: bool = False) -> None:
    doc = {
        "k": matrices[0].k,
        "cycle": cycle,
        "matrices": [m.p.tolist() for m in matrices],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def env_from_file(path, T: int | None = None) -> SequenceStream:
    matrices, cycle = load_sequence(path)
    if T is None:
        T = len(matrices)
    return SequenceStream(matrices, T, cycle=cycle, label=f"file({Path(path).name})")


def sample_feedback(m: PreferenceMatrix, x: int, y: int, rng: np.random.Generator) -> int:
    """Draw ``o ~ Bernoulli(p[x, y])``; ``o = 1`` means ``x`` won."""
    k = m.k
    if not (0 <= x < k and 0 <= y < k):
        raise IndexError(f"pair ({x}, {y}) out of range for K={k}")
    return int(rng.random() < m.p[x, y])


# ---------------------------------------------------------------------------
# declarative construction (used by the experiment config)


def environment_from_spec(spec: dict, T: int, base_dir: Path | None = None) -> EnvironmentStream:
    """Build a stream from a config dict. ``spec["kind"]`` selects the generator.

    Kinds: ``stationary`` (``p`` or ``uniform_k``), ``lower_bound`` (``k``,
    ``epsilon`` number or ``"tuned"``, ``m``, optional ``c``), ``fixed_gap``
    (``k``, ``delta``, ``perturbation_scale``, ``seed``) and ``file``
    (``path``).
    """
    kind = spec.get("kind")
    if kind == "stationary":
        if "p" in spec:
            m = validate_matrix(spec["p"], repair=bool(spec.get("repair", False)))
        elif "uniform_k" in spec:
            m = validate_matrix(np.full((spec["uniform_k"],) * 2, 0.5))
        else:
            raise ParamError("stationary environment needs 'p' or 'uniform_k'")
        return StationaryStream(m, T)
    if kind == "lower_bound":
        K = int(spec["k"])
        eps = spec.get("epsilon", "tuned")
        if eps == "tuned":
            eps = tuned_epsilon(K, T, float(spec.get("c", 1.0)))
        m_idx = int(spec.get("m", 1))
        m = lower_bound_instance(K, float(eps), m_idx)
        return StationaryStream(m, T, label=f"lower_bound(K={K},eps={eps:.6g},m={m_idx})")
    if kind == "fixed_gap":
        stream, _ = fixed_gap_env(int(spec["k"]), float(spec["delta"]), T,
                                  float(spec.get("perturbation_scale", 0.0)),
                                  int(spec.get("seed", 0)))
        return stream
    if kind == "file":
        path = Path(spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return env_from_file(path, T)
    raise ParamError(f"unknown environment kind {kind!r}")
