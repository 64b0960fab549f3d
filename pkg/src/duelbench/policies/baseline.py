from __future__ import annotations

import numpy as np

from .base import Policy, check_k


def uniform_baseline_select(K: int, rng: np.random.Generator) -> tuple[int, int]:
    """Two independent uniform items; the control policy for regret comparisons."""
    check_k(K)
    u = rng.random(2)
    return min(int(u[0] * K), K - 1), min(int(u[1] * K), K - 1)


class UniformPolicy(Policy):
    kind = "uniform"

    def _select(self, rng):
        return uniform_baseline_select(self.k, rng)

    def _update(self, x, y, o):
        pass

    def _run_block(self, P, upol, uenv, xs, ys, os):
        self._kernels.uniform_block(self.k, upol, xs, ys)
        self._kernels.feedback_block(P, xs, ys, uenv, os)
