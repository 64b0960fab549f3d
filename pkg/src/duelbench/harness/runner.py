"""Seeded simulation loop, seed sweeps and cross-seed aggregation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from .._backend import BACKEND
from ..environments import (
    EnvironmentStream,
    check_fixed_gap,
    environment_from_spec,
)
from ..errors import DuelBenchError, ParamError
from ..policies import Policy, make_policy
from ..preference import PreferenceMatrix, borda_scores, hindsight_best
from ..regret import RegretResult, RegretTrace
from .bounds import BOUND_LABELS, bound_curve
from .config import ExperimentConfig

BLOCK = 1 << 16

ENV_STREAM, POLICY_STREAM = 0, 1


class SeedFailure(DuelBenchError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"seed {seed} failed: {type(cause).__name__}: {cause}")
        self.seed = seed
        self.cause = cause


def run_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent feedback and policy generators derived from one run seed."""
    env = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ENV_STREAM,)))
    pol = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(POLICY_STREAM,)))
    return env, pol


@dataclass
class RunResult:
    seed: int
    regret: RegretResult
    policy_kind: str
    params: dict
    committed: int | None = None
    commit_round: int | None = None
    final_state: dict = field(default_factory=dict)

    def summary(self) -> dict:
        r = self.regret
        return {
            "seed": self.seed,
            "R_T": r.R_T,
            "R_T_shifted": r.R_T_shifted,
            "i_star": r.i_star + 1,
            "committed": None if self.committed is None else self.committed + 1,
            "commit_round": self.commit_round,
            "post_commit_regret": r.segment_regret,
        }


def _diag(policy: Policy) -> dict:
    snap = policy.snapshot()
    out = {}
    for key in ("q", "b_tilde"):
        if key in snap:
            for i, v in enumerate(snap[key]):
                out[f"diag_{key}{i + 1}"] = v
    if "committed" in snap:
        out["diag_committed"] = snap["committed"] or 0
    return out


def simulate(env: EnvironmentStream, policy: Policy, seed: int, checkpoints=(),
             diagnostics: bool = False, block: int = BLOCK) -> RunResult:
    """Play ``policy`` against ``env`` for the full horizon.

    Each block draws policy uniforms and feedback uniforms from their own
    seeded streams, hands them to the kernel, then records ground-truth
    regret. With ``diagnostics`` blocks end at checkpoints so a policy
    snapshot can be attached to every checkpoint row.
    """
    T, k = env.horizon, env.k
    if policy.k != k:
        raise ParamError(f"policy has K={policy.k}, environment has K={k}")
    trace = RegretTrace(k, T, checkpoints)
    cps = trace.checkpoints
    env_rng, pol_rng = run_rngs(seed)
    xs = np.empty(block, np.int32)
    ys = np.empty(block, np.int32)
    os_ = np.empty(block, np.int8)
    marked = False
    r0 = 0
    next_cp = 0
    while r0 < T:
        n = min(block, T - r0)
        if diagnostics:
            while next_cp < len(cps) and cps[next_cp] <= r0:
                next_cp += 1
            if next_cp < len(cps):
                n = min(n, int(cps[next_cp]) - r0)
        P, B, S = env.block(r0, n)
        upol = pol_rng.random((n, 2))
        uenv = env_rng.random(n)
        policy.run_block(P, upol, uenv, xs[:n], ys[:n], os_[:n])
        if not marked and policy.commit_round is not None:
            trace.mark_segment(policy.commit_round)
            marked = True
        if diagnostics:
            trace.pending_diag = _diag(policy)
        trace.record_block(B, S, xs[:n], ys[:n], os_[:n])
        r0 += n
    return RunResult(
        seed=seed, regret=trace.finalize(), policy_kind=policy.kind, params=policy.params(),
        committed=policy.committed, commit_round=policy.commit_round,
        final_state=policy.snapshot(),
    )


def build(config: ExperimentConfig, backend: str | None = None) -> tuple[EnvironmentStream, Policy]:
    env = environment_from_spec(config.environment, config.horizon, config.base_dir)
    policy = make_policy(config.with_policy_defaults(), env.k, config.horizon, backend)
    return env, policy


def run_single(config: ExperimentConfig, seed: int, backend: str | None = None,
               env: EnvironmentStream | None = None) -> RunResult:
    if env is None:
        env = environment_from_spec(config.environment, config.horizon, config.base_dir)
    policy = make_policy(config.with_policy_defaults(), env.k, config.horizon, backend)
    return simulate(env, policy, seed, config.checkpoint_rounds, config.diagnostics)


# ---------------------------------------------------------------------------
# aggregation


def nearest_rank(values: np.ndarray, pct: int) -> float:
    """Nearest-rank percentile: the ``ceil(pct/100 * n)``-th smallest value."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = len(v)
    rank = max(1, -(-pct * n // 100))
    return float(v[rank - 1])


@dataclass
class AggregateSummary:
    checkpoints: list[int]
    n_seeds: int
    mean_R: np.ndarray
    std_R: np.ndarray
    p10: np.ndarray
    p50: np.ndarray
    p90: np.ndarray
    bound: np.ndarray
    frac_under_bound: np.ndarray
    bound_label: str | None = None

    def rows(self) -> list[dict]:
        cols = ("mean_R", "std_R", "p10", "p50", "p90", "bound", "frac_under_bound")
        return [
            {"t": t, **{c: float(getattr(self, c)[i]) for c in cols}}
            for i, t in enumerate(self.checkpoints)
        ]


def certified_gap(env: EnvironmentStream, spec: dict | None = None) -> float | None:
    """Fixed gap of the environment's hindsight winner, or None if there is none."""
    if spec and spec.get("kind") == "fixed_gap":
        return float(spec["delta"])
    if env.stationary:
        b = env.block(0, 1)[1][0]
        i_star = hindsight_best(b)
    else:
        cum = np.zeros(env.k)
        for r0 in range(0, env.horizon, BLOCK):
            cum += env.block(r0, min(BLOCK, env.horizon - r0))[1].sum(axis=0)
        i_star = hindsight_best(cum)
    gap = check_fixed_gap(env, i_star, 0.0).min_observed_gap
    return gap if gap > 0 else None


def bound_for(config: ExperimentConfig, env: EnvironmentStream, checkpoints) -> tuple[np.ndarray, str | None, dict]:
    kind = config.policy["kind"]
    spec = config.with_policy_defaults()
    extra: dict = {}
    if kind not in BOUND_LABELS:
        return np.full(len(checkpoints), np.nan), None, extra
    Delta = None
    if kind == "bcb":
        Delta = certified_gap(env, config.environment)
        extra["certified_gap"] = Delta
        if Delta is None:
            return np.full(len(checkpoints), np.nan), BOUND_LABELS[kind], extra
        Delta = min(Delta, 1.0)
    values = bound_curve(kind, env.k, config.horizon, spec.get("delta"), Delta, checkpoints)
    return values, BOUND_LABELS[kind], extra


def aggregate(runs: list[RunResult], checkpoints: list[int], bound: np.ndarray,
              bound_label: str | None = None) -> AggregateSummary:
    runs = sorted(runs, key=lambda r: r.seed)
    n = len(runs)
    if n == 0:
        raise ParamError("cannot aggregate zero runs")
    R = np.array([[row.R_t for row in r.regret.checkpoints] for r in runs]).reshape(n, len(checkpoints))
    if len(checkpoints):
        pct = {p: np.array([nearest_rank(R[:, j], p) for j in range(R.shape[1])]) for p in (10, 50, 90)}
    else:
        pct = {p: np.empty(0) for p in (10, 50, 90)}
    with np.errstate(invalid="ignore"):
        under = np.where(np.isnan(bound), np.nan, (R <= bound).mean(axis=0)) if n else bound
    return AggregateSummary(
        checkpoints=list(checkpoints), n_seeds=n,
        mean_R=R.mean(axis=0), std_R=R.std(axis=0),
        p10=pct[10], p50=pct[50], p90=pct[90],
        bound=np.asarray(bound, dtype=np.float64), frac_under_bound=under,
        bound_label=bound_label,
    )


@dataclass
class SweepResult:
    summary: AggregateSummary
    runs: dict[int, RunResult]
    resolved: dict


def resolve_config(config: ExperimentConfig, env: EnvironmentStream, policy: Policy,
                   bound_extra: dict | None = None) -> dict:
    """The config with every default made explicit."""
    d = config.to_dict()
    d["policy"] = {"kind": policy.kind, **policy.params()}
    d["environment_resolved"] = env.describe()
    d["checkpoints"] = config.checkpoint_rounds
    d["rng"] = {"scheme": "SeedSequence(seed, spawn_key=(stream,))",
                "streams": {"environment_feedback": ENV_STREAM, "policy": POLICY_STREAM}}
    d["item_indexing"] = "1-based"
    if bound_extra:
        d["bound"] = bound_extra
    return d


def run_sweep(config: ExperimentConfig, threads: int | None = None,
              backend: str | None = None) -> SweepResult:
    """Run every seed (optionally on a thread pool) and aggregate in seed order."""
    env, policy0 = build(config, backend)
    cps = config.checkpoint_rounds
    threads = config.threads if threads is None else threads

    def one(seed):
        try:
            return run_single(config, seed, backend, env=env)
        except Exception as exc:
            raise SeedFailure(seed, exc) from exc

    seeds = sorted(config.seeds)
    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    bound, label, extra = bound_for(config, env, cps)
    extra["label"] = label
    summary = aggregate(results, cps, bound, label)
    return SweepResult(summary, {r.seed: r for r in results},
                       resolve_config(config, env, policy0, extra))


# ---------------------------------------------------------------------------
# Monte-Carlo expected regret on a stationary matrix


def mc_expected_regret(m: PreferenceMatrix, policy_spec: dict, T: int, n_runs: int,
                       seed: int = 0, backend: str | None = None) -> tuple[float, float]:
    """Mean and standard error of ``R_T`` over ``n_runs`` independent short runs.

    Exponential-weights policies run all episodes through one kernel call
    with a state reset every ``T`` rounds; other policies are rebuilt per run.
    """
    k = m.k
    b = borda_scores(m).values
    i_star = hindsight_best(b)
    env_rng, pol_rng = run_rngs(seed)
    total = n_runs * T
    xs = np.empty(total, np.int32)
    ys = np.empty(total, np.int32)
    os_ = np.empty(total, np.int8)
    P = np.broadcast_to(m.p, (total, k, k))
    upol = pol_rng.random((total, 2))
    uenv = env_rng.random(total)
    kind = policy_spec["kind"]
    if kind in ("dexp3", "dexp3_hp"):
        policy = make_policy(policy_spec, k, T, backend)
        policy.run_block(P, upol, uenv, xs, ys, os_, reset_every=T)
    else:
        for r in range(n_runs):
            sl = slice(r * T, (r + 1) * T)
            policy = make_policy(policy_spec, k, T, backend)
            policy.run_block(P[sl], upol[sl], uenv[sl], xs[sl], ys[sl], os_[sl])
    per_round = b[i_star] - 0.5 * (b[xs] + b[ys])
    R = per_round.reshape(n_runs, T).sum(axis=1)
    return float(R.mean()), float(R.std(ddof=1) / math.sqrt(n_runs))


def software_info() -> dict:
    import platform

    return {"package": "duelbench", "version": __version__, "backend": BACKEND,
            "python": platform.python_version(), "numpy": np.__version__}
