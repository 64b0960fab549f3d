"""Independent oracles for the test suite.

Monte-Carlo drivers sample pairs and outcomes with their own code and feed
them through the package's estimators; analytic targets and the exhaustive
enumerator re-derive every formula from scratch (plain loops, no imports
from the policy or scoring modules).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParamError

ESTIMATORS = ("dexp3", "hp", "bcb")


def _as_array(m) -> np.ndarray:
    return np.asarray(getattr(m, "p", m), dtype=np.float64)


def analytic_target(estimator: str, m, q=None, beta: float = 0.0) -> np.ndarray:
    """Expected value of an estimator's output, by direct summation.

    ``dexp3``: shifted scores; ``hp``: shifted scores plus ``beta / q``;
    ``bcb``: Borda scores. ``q`` defaults to uniform.
    """
    p = _as_array(m)
    k = p.shape[0]
    q = [1.0 / k] * k if q is None else list(q)
    out = np.zeros(k)
    for i in range(k):
        if estimator == "bcb":
            out[i] = sum(p[i, j] for j in range(k) if j != i) / (k - 1)
        else:
            out[i] = sum(p[i, j] for j in range(k)) / k
            if estimator == "hp":
                out[i] += beta / q[i]
    return out


def _sample_rounds(estimator, p, q, N, rng, o_override=None):
    k = p.shape[0]
    if estimator == "bcb":
        x = rng.integers(0, k, size=N)
        y = rng.integers(0, k - 1, size=N)
        y = y + (y >= x)
    else:
        x = rng.choice(k, size=N, p=q)
        y = rng.choice(k, size=N, p=q)
    if o_override is None:
        o = (rng.random(N) < p[x, y]).astype(np.int64)
    else:
        o = np.full(N, int(o_override))
    return x, y, o


def mc_expectation(estimator: str, m, q=None, N: int = 10**6, seed: int = 0,
                   beta: float = 0.0, batch: int = 1 << 18) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo mean and standard error of an estimator under a frozen sampler.

    ``q=None`` means uniform for the exponential-weights estimators; BCB
    always uses its own uniform distinct-pair scheme.
    """
    from .policies import bcb_estimate, dexp3_estimate, hp_estimate

    if estimator not in ESTIMATORS:
        raise ParamError(f"unknown estimator {estimator!r}")
    if N < 10**4:
        raise ParamError(f"N must be >= 1e4, got {N}")
    p = _as_array(m)
    k = p.shape[0]
    q = np.full(k, 1.0 / k) if q is None else np.asarray(q, dtype=np.float64)
    rng = np.random.default_rng(seed)
    total = np.zeros(k)
    total_sq = np.zeros(k)
    done = 0
    while done < N:
        n = min(batch, N - done)
        x, y, o = _sample_rounds(estimator, p, q, n, rng)
        if estimator == "dexp3":
            v = dexp3_estimate(q, x, y, o).values
        elif estimator == "hp":
            v = hp_estimate(q, x, y, o, beta).values
        else:
            v = bcb_estimate(x, o, k).values
        total += v.sum(axis=0)
        total_sq += (v * v).sum(axis=0)
        done += n
    mean = total / N
    var = (total_sq - N * mean ** 2) / (N - 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / N)


def mc_second_moment(m, q, gamma: float, N: int = 10**6, seed: int = 0,
                     o_override: int | None = None, batch: int = 1 << 18) -> tuple[float, float]:
    """Estimate ``sum_i q(i) E[est(i)^2]`` for the D-EXP3 estimator.

    Returns ``(value, standard_error)``. ``o_override`` forces every outcome,
    which makes zero-feedback cases expressible.
    """
    from .policies import dexp3_estimate

    p = _as_array(m)
    k = p.shape[0]
    q = np.asarray(q, dtype=np.float64)
    if not 0.0 < gamma <= 1.0:
        raise ParamError(f"gamma must lie in (0, 1], got {gamma}")
    if q.min() < gamma / k - 1e-12:
        raise ParamError("q violates the exploration floor gamma / K")
    rng = np.random.default_rng(seed)
    s1 = s2 = 0.0
    done = 0
    while done < N:
        n = min(batch, N - done)
        x, y, o = _sample_rounds("dexp3", p, q, n, rng, o_override)
        v = dexp3_estimate(q, x, y, o).values
        z = (v * v) @ q
        s1 += float(z.sum())
        s2 += float((z * z).sum())
        done += n
    mean = s1 / N
    var = max((s2 - N * mean ** 2) / (N - 1), 0.0)
    return mean, math.sqrt(var / N)


# ---------------------------------------------------------------------------
# exhaustive enumeration


def exhaustive_tiny_check(m, T: int, policy_kind: str, eta: float | None = None,
                          gamma: float | None = None, beta: float = 0.0,
                          delta: float = 0.05, dps: int = 50):
    """Exact expected regret of a K=2 policy by enumerating every history.

    ``m`` is one matrix (stationary) or a list of T matrices. Each path
    ``(x_1, y_1, o_1, ..., x_T, y_T, o_T)`` is weighted by its exact
    probability under the policy's action distribution and the Bernoulli
    feedback. Arithmetic runs in mpmath at ``dps`` digits; matrix entries are
    read through their decimal repr so 0.7 means exactly 7/10.

    Returns ``(expected_regret, total_probability)`` as mpmath numbers.
    """
    import mpmath

    if not 1 <= T <= 4:
        raise ParamError(f"T must lie in 1..4, got {T}")
    mats = list(m) if isinstance(m, (list, tuple)) else [m] * T
    if len(mats) != T:
        raise ParamError("need one matrix per round")
    arrays = [_as_array(a) for a in mats]
    k = arrays[0].shape[0]
    if k != 2:
        raise ParamError(f"enumeration is limited to K=2, got K={k}")
    if policy_kind in ("dexp3", "dexp3_hp") and (eta is None or gamma is None):
        raise ParamError("eta and gamma are required for exponential-weights policies")

    with mpmath.workdps(dps):
        mp = mpmath.mpf
        P = [[[mp(repr(float(a[i, j]))) for j in range(k)] for i in range(k)] for a in arrays]
        borda = [[sum(Pt[i][j] for j in range(k) if j != i) / (k - 1) for i in range(k)] for Pt in P]
        totals = [sum(b[i] for b in borda) for i in range(k)]
        i_star = max(range(k), key=lambda i: (totals[i], -i))

        def exp_weights_q(cum):
            w = [mpmath.exp(mp(eta) * c) for c in cum]
            z = sum(w)
            return [(1 - mp(gamma)) * wi / z + mp(gamma) / k for wi in w]

        def action_probs(state, t):
            if policy_kind in ("dexp3", "dexp3_hp"):
                q = exp_weights_q(state["cum"])
                return [((x, y), q[x] * q[y]) for x in range(k) for y in range(k)]
            if policy_kind == "bcb":
                if state["hat"] is not None:
                    return [((state["hat"],) * 2, mp(1))]
                return [((x, y), mp(1) / (k * (k - 1)))
                        for x in range(k) for y in range(k) if x != y]
            if policy_kind == "uniform":
                return [((x, y), mp(1) / (k * k)) for x in range(k) for y in range(k)]
            raise ParamError(f"unknown policy kind {policy_kind!r}")

        def advance(state, x, y, o, t):
            s = {"cum": list(state["cum"]), "hat": state["hat"]}
            if policy_kind in ("dexp3", "dexp3_hp"):
                q = exp_weights_q(state["cum"])
                for i in range(k):
                    v = mp(beta) / q[i] if policy_kind == "dexp3_hp" else mp(0)
                    if i == x and o:
                        v += mp(1) / (k * q[x] * q[y])
                    s["cum"][i] += v
            elif policy_kind == "bcb" and s["hat"] is None:
                if o:
                    s["cum"][x] += k
                rad = 2 * mpmath.sqrt(mp(k) / t * mpmath.log(mp(2) * k * T / mp(repr(delta))))
                avg = [c / t for c in s["cum"]]
                for i in range(k):
                    if all(avg[i] - rad > avg[j] + rad for j in range(k) if j != i):
                        s["hat"] = i
                        break
            return s

        def walk(t, state, prob, regret):
            if t > T:
                return prob * regret, prob
            b = borda[t - 1]
            acc_r = mp(0)
            acc_p = mp(0)
            for (x, y), pa in action_probs(state, t):
                r_t = b[i_star] - (b[x] + b[y]) / 2
                win = P[t - 1][x][y]
                for o, po in ((1, win), (0, 1 - win)):
                    if po == 0:
                        continue
                    er, pp = walk(t + 1, advance(state, x, y, o, t), prob * pa * po, regret + r_t)
                    acc_r += er
                    acc_p += pp
            return acc_r, acc_p

        return walk(1, {"cum": [mp(0)] * k, "hat": None}, mp(1), mp(0))
