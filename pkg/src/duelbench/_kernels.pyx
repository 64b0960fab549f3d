# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the simulator.

Every function here has a line-for-line twin in ``_kernels_py.py``. Both
consume the same pre-drawn uniforms and perform floating-point operations in
the same order, so the two backends produce bit-identical trajectories.
"""

from libc.math cimport exp, log, sqrt, INFINITY


cdef inline Py_ssize_t _categorical(const double[::1] q, Py_ssize_t k, double u) noexcept nogil:
    cdef double c = 0.0
    cdef Py_ssize_t i, last = 0
    for i in range(k):
        if q[i] > 0.0:
            last = i
        c += q[i]
        if u < c:
            return i
    return last


cdef inline void _exp_weights(double[::1] cum, double[::1] q, double[::1] w,
                              Py_ssize_t k, double eta, double gamma) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = -INFINITY
    cdef double z = 0.0
    for i in range(k):
        w[i] = eta * cum[i]
        if w[i] > m:
            m = w[i]
    for i in range(k):
        w[i] = exp(w[i] - m)
        z += w[i]
    for i in range(k):
        q[i] = (1.0 - gamma) * (w[i] / z) + gamma / k


def exp_weights_block(double[::1] cum, double[::1] q, double eta, double gamma, double beta,
                      const double[:, :, :] P, const double[:, ::1] upol, const double[::1] uenv,
                      int[::1] xs, int[::1] ys, signed char[::1] os,
                      long t0=0, long reset_every=0):
    """Run D-EXP3 (``beta == 0``) or its high-probability variant for one block.

    ``cum`` and ``q`` are updated in place; ``xs``, ``ys``, ``os`` receive the
    played pairs and outcomes.
    """
    cdef Py_ssize_t n = uenv.shape[0]
    cdef Py_ssize_t k = cum.shape[0]
    cdef Py_ssize_t r, i, x, y
    cdef int o
    cdef double s
    cdef bint hp = beta > 0.0
    cdef double[::1] w = cum.copy()
    with nogil:
        for r in range(n):
            if reset_every > 0 and (t0 + r) % reset_every == 0:
                for i in range(k):
                    cum[i] = 0.0
                    q[i] = 1.0 / k
            x = _categorical(q, k, upol[r, 0])
            y = _categorical(q, k, upol[r, 1])
            o = 1 if uenv[r] < P[r, x, y] else 0
            xs[r] = <int>x
            ys[r] = <int>y
            os[r] = <signed char>o
            if hp:
                for i in range(k):
                    s = beta / q[i]
                    if o and i == x:
                        s = 1.0 / (k * q[x] * q[y]) + s
                    cum[i] += s
            elif o:
                cum[x] += 1.0 / (k * q[x] * q[y])
            else:
                continue
            _exp_weights(cum, q, w, k, eta, gamma)


def bcb_block(double[::1] cum, long t, long committed, long commit_round,
              long horizon, double delta, bint clamp,
              const double[:, :, :] P, const double[:, ::1] upol, const double[::1] uenv,
              int[::1] xs, int[::1] ys, signed char[::1] os):
    """Run Borda-Confidence-Bound for one block.

    ``t`` counts rounds already played, ``committed`` is -1 before the commit.
    Returns the updated ``(t, committed, commit_round)``.
    """
    cdef Py_ssize_t n = uenv.shape[0]
    cdef Py_ssize_t k = cum.shape[0]
    cdef Py_ssize_t r, i, x, y, i1
    cdef int o
    cdef double logterm = log(2.0 * k * horizon / delta)
    cdef double rad, lcb, ucb, other, u1, u2
    with nogil:
        for r in range(n):
            t += 1
            if committed >= 0:
                x = committed
                y = committed
            else:
                x = <Py_ssize_t>(upol[r, 0] * k)
                if x >= k:
                    x = k - 1
                y = <Py_ssize_t>(upol[r, 1] * (k - 1))
                if y >= k - 1:
                    y = k - 2
                if y >= x:
                    y += 1
            o = 1 if uenv[r] < P[r, x, y] else 0
            xs[r] = <int>x
            ys[r] = <int>y
            os[r] = <signed char>o
            if committed >= 0:
                continue
            if o:
                cum[x] += k
            rad = 2.0 * sqrt(<double>k / t * logterm)
            # top two upper bounds, then the first item whose lower bound
            # clears the best upper bound among the others
            u1 = -INFINITY
            u2 = -INFINITY
            i1 = -1
            for i in range(k):
                ucb = cum[i] / t + rad
                if clamp and ucb > 1.0:
                    ucb = 1.0
                if ucb > u1:
                    u2 = u1
                    u1 = ucb
                    i1 = i
                elif ucb > u2:
                    u2 = ucb
            for i in range(k):
                lcb = cum[i] / t - rad
                if clamp and lcb < 0.0:
                    lcb = 0.0
                other = u2 if i == i1 else u1
                if lcb > other:
                    committed = i
                    commit_round = t
                    break
    return t, committed, commit_round


def uniform_block(long k, const double[:, ::1] upol, int[::1] xs, int[::1] ys):
    cdef Py_ssize_t n = upol.shape[0]
    cdef Py_ssize_t r, x, y
    with nogil:
        for r in range(n):
            x = <Py_ssize_t>(upol[r, 0] * k)
            y = <Py_ssize_t>(upol[r, 1] * k)
            xs[r] = <int>(x if x < k else k - 1)
            ys[r] = <int>(y if y < k else k - 1)


def feedback_block(const double[:, :, :] P, int[::1] xs, int[::1] ys,
                   const double[::1] uenv, signed char[::1] os):
    cdef Py_ssize_t n = uenv.shape[0]
    cdef Py_ssize_t r
    with nogil:
        for r in range(n):
            os[r] = 1 if uenv[r] < P[r, xs[r], ys[r]] else 0
