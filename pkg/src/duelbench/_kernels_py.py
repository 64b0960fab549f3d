"""Pure-Python twin of ``_kernels.pyx``.

Used when the compiled extension is unavailable or ``DUELBENCH_PURE_PYTHON``
is set. Keep the arithmetic order identical to the Cython source: the test
suite asserts bit-identical trajectories across backends.
"""

from __future__ import annotations

import math


def _categorical(q: list, k: int, u: float) -> int:
    c = 0.0
    last = 0
    for i in range(k):
        if q[i] > 0.0:
            last = i
        c += q[i]
        if u < c:
            return i
    return last


def _exp_weights(cum: list, q: list, k: int, eta: float, gamma: float) -> None:
    w = [eta * c for c in cum]
    m = -math.inf
    for v in w:
        if v > m:
            m = v
    z = 0.0
    for i in range(k):
        w[i] = math.exp(w[i] - m)
        z += w[i]
    for i in range(k):
        q[i] = (1.0 - gamma) * (w[i] / z) + gamma / k


def exp_weights_block(cum, q, eta, gamma, beta, P, upol, uenv, xs, ys, os,
                      t0=0, reset_every=0):
    n = len(uenv)
    k = len(cum)
    c = cum.tolist()
    qq = q.tolist()
    up = upol.tolist()
    ue = uenv.tolist()
    hp = beta > 0.0
    for r in range(n):
        if reset_every > 0 and (t0 + r) % reset_every == 0:
            c = [0.0] * k
            qq = [1.0 / k] * k
        x = _categorical(qq, k, up[r][0])
        y = _categorical(qq, k, up[r][1])
        o = 1 if ue[r] < P[r, x, y] else 0
        xs[r] = x
        ys[r] = y
        os[r] = o
        if hp:
            for i in range(k):
                s = beta / qq[i]
                if o and i == x:
                    s = 1.0 / (k * qq[x] * qq[y]) + s
                c[i] += s
        elif o:
            c[x] += 1.0 / (k * qq[x] * qq[y])
        else:
            continue
        _exp_weights(c, qq, k, eta, gamma)
    cum[:] = c
    q[:] = qq


def bcb_block(cum, t, committed, commit_round, horizon, delta, clamp,
              P, upol, uenv, xs, ys, os):
    n = len(uenv)
    k = len(cum)
    c = cum.tolist()
    up = upol.tolist()
    ue = uenv.tolist()
    logterm = math.log(2.0 * k * horizon / delta)
    for r in range(n):
        t += 1
        if committed >= 0:
            x = y = committed
        else:
            x = min(int(up[r][0] * k), k - 1)
            y = min(int(up[r][1] * (k - 1)), k - 2)
            if y >= x:
                y += 1
        o = 1 if ue[r] < P[r, x, y] else 0
        xs[r] = x
        ys[r] = y
        os[r] = o
        if committed >= 0:
            continue
        if o:
            c[x] += k
        rad = 2.0 * math.sqrt(k / t * logterm)
        u1 = u2 = -math.inf
        i1 = -1
        for i in range(k):
            ucb = c[i] / t + rad
            if clamp and ucb > 1.0:
                ucb = 1.0
            if ucb > u1:
                u2, u1, i1 = u1, ucb, i
            elif ucb > u2:
                u2 = ucb
        for i in range(k):
            lcb = c[i] / t - rad
            if clamp and lcb < 0.0:
                lcb = 0.0
            if lcb > (u2 if i == i1 else u1):
                committed = i
                commit_round = t
                break
    cum[:] = c
    return t, committed, commit_round


def uniform_block(k, upol, xs, ys):
    for r, (a, b) in enumerate(upol.tolist()):
        xs[r] = min(int(a * k), k - 1)
        ys[r] = min(int(b * k), k - 1)


def feedback_block(P, xs, ys, uenv, os):
    for r, u in enumerate(uenv.tolist()):
        os[r] = 1 if u < P[r, xs[r], ys[r]] else 0
