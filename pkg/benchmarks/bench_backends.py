"""Compare the compiled and pure-Python round kernels.

Runs the same seeded simulation on both backends, checks that the results
match bit for bit and reports rounds per second.

    python benchmarks/bench_backends.py --horizon 200000 --repeats 3
"""

from __future__ import annotations

import argparse
import time

from duelbench import _backend, lower_bound_instance, stationary_env
from duelbench.harness import simulate
from duelbench.policies import make_policy

POLICIES = {
    "dexp3": {"kind": "dexp3"},
    "dexp3_hp": {"kind": "dexp3_hp", "delta": 0.05},
    "bcb": {"kind": "bcb", "delta": 0.05},
    "uniform": {"kind": "uniform"},
}


def time_run(spec: dict, k: int, T: int, backend: str, repeats: int):
    env = stationary_env(lower_bound_instance(k, 0.1, 1), T)
    best, res = float("inf"), None
    for _ in range(repeats):
        pol = make_policy(spec, k, T, backend)
        t0 = time.perf_counter()
        res = simulate(env, pol, 0, [T])
        best = min(best, time.perf_counter() - t0)
    return best, res


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--horizon", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--policies", nargs="+", default=list(POLICIES), choices=list(POLICIES))
    args = ap.parse_args(argv)

    if not _backend.compiled_available():
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    print(f"K={args.k}  T={args.horizon}  best of {args.repeats}")
    print(f"{'policy':<10}{'cython s':>10}{'python s':>10}{'speedup':>9}  identical")
    for name in args.policies:
        tc, rc = time_run(POLICIES[name], args.k, args.horizon, "cython", args.repeats)
        tp, rp = time_run(POLICIES[name], args.k, args.horizon, "python", args.repeats)
        same = rc.regret.R_T == rp.regret.R_T and rc.final_state == rp.final_state
        print(f"{name:<10}{tc:>10.3f}{tp:>10.3f}{tp / tc:>8.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
