"""Declarative experiment description and its fully resolved echo."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParamError, ParseError

DEFAULT_DELTA = 0.05
DEFAULT_CHECKPOINTS = 100


def geometric_checkpoints(T: int, count: int = DEFAULT_CHECKPOINTS) -> list[int]:
    """``count`` geometrically spaced rounds in 1..T (deduplicated), plus T."""
    if count <= 0:
        return []
    pts = np.unique(np.rint(np.geomspace(1, T, count)).astype(np.int64))
    pts = pts[(pts >= 1) & (pts <= T)]
    return sorted(set(pts.tolist()) | {T})


def parse_seeds(spec) -> list[int]:
    """Seeds from a list, ``{"base": b, "count": n}``, an int, or ``"a:b"`` / ``"1,2,3"``."""
    if isinstance(spec, bool):
        raise ParamError(f"bad seed spec {spec!r}")
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, dict):
        base, count = int(spec.get("base", 0)), int(spec["count"])
        return list(range(base, base + count))
    if isinstance(spec, str):
        if ":" in spec:
            a, b = spec.split(":", 1)
            return list(range(int(a), int(b)))
        return [int(s) for s in spec.split(",") if s.strip()]
    if isinstance(spec, (list, tuple)):
        return [int(s) for s in spec]
    raise ParamError(f"bad seed spec {spec!r}")


@dataclass
class ExperimentConfig:
    environment: dict
    policy: dict
    horizon: int
    seeds: list[int] = field(default_factory=lambda: [0])
    checkpoints: list[int] | int = DEFAULT_CHECKPOINTS
    output_dir: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv"])
    threads: int = 1
    diagnostics: bool = False
    base_dir: Path | None = None

    def __post_init__(self):
        if not isinstance(self.environment, dict) or "kind" not in self.environment:
            raise ParamError("config.environment must be an object with a 'kind'")
        if not isinstance(self.policy, dict) or "kind" not in self.policy:
            raise ParamError("config.policy must be an object with a 'kind'")
        self.horizon = int(float(self.horizon))
        if self.horizon < 1:
            raise ParamError(f"horizon must be >= 1, got {self.horizon}")
        self.seeds = parse_seeds(self.seeds)
        if not self.seeds:
            raise ParamError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ParamError("duplicate seeds")
        for f in self.formats:
            if f not in ("csv", "json"):
                raise ParamError(f"unknown output format {f!r}")

    @property
    def checkpoint_rounds(self) -> list[int]:
        if isinstance(self.checkpoints, int):
            return geometric_checkpoints(self.horizon, self.checkpoints)
        cps = sorted({int(c) for c in self.checkpoints})
        if cps and (cps[0] < 1 or cps[-1] > self.horizon):
            raise ParamError(f"checkpoints must lie in 1..{self.horizon}")
        return cps

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        out = d.pop("output", {}) or {}
        known = {"environment", "policy", "horizon", "seeds", "checkpoints", "threads",
                 "diagnostics"}
        unknown = set(d) - known
        if unknown:
            raise ParamError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(
                environment=d["environment"], policy=d["policy"], horizon=d["horizon"],
                seeds=d.get("seeds", [0]),
                checkpoints=d.get("checkpoints", DEFAULT_CHECKPOINTS),
                output_dir=out.get("dir"), formats=list(out.get("formats", ["csv"])),
                threads=int(d.get("threads", 1)), diagnostics=bool(d.get("diagnostics", False)),
                base_dir=base_dir,
            )
        except KeyError as exc:
            raise ParamError(f"missing config key {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ParseError(f"{path}: config must be a JSON object")
        return cls.from_dict(doc, base_dir=path.parent)

    def to_dict(self) -> dict:
        return {
            "environment": copy.deepcopy(self.environment),
            "policy": copy.deepcopy(self.policy),
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "checkpoints": self.checkpoints if isinstance(self.checkpoints, int)
            else list(self.checkpoints),
            "threads": self.threads,
            "diagnostics": self.diagnostics,
            "output": {"dir": self.output_dir, "formats": list(self.formats)},
        }

    def with_policy_defaults(self) -> dict:
        """Policy spec with the harness-level default confidence filled in."""
        spec = dict(self.policy)
        if spec["kind"] in ("dexp3_hp", "bcb"):
            spec.setdefault("delta", DEFAULT_DELTA)
        return spec
