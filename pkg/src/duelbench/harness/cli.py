"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..environments import (
    check_fixed_gap,
    environment_from_spec,
    env_from_file,
    lower_bound_instance,
    save_sequence,
    tuned_epsilon,
)
from ..errors import DuelBenchError, GapViolation, ParamError, ParseError, ValidationError
from ..preference import borda_scores, hindsight_best
from .bounds import BOUND_LABELS, bound_curve
from .config import ExperimentConfig, geometric_checkpoints, parse_seeds
from .output import Stopwatch, emit_outputs
from .runner import SeedFailure, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

_CONFIG_ERRORS = (ParamError, ParseError, ValidationError, KeyError, TypeError)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "format", None):
        cfg.formats = [args.format]
    if getattr(args, "checkpoints", None) is not None:
        cfg.checkpoints = args.checkpoints
    if getattr(args, "threads", None):
        cfg.threads = args.threads
    if getattr(args, "diagnostics", False):
        cfg.diagnostics = True
    return cfg


def _run(args, seeds) -> int:
    cfg = _load_config(args)
    if seeds is not None:
        cfg.seeds = parse_seeds(seeds)
    with Stopwatch() as sw:
        result = run_sweep(cfg, backend=args.backend)
    paths = emit_outputs(result, cfg, wall_clock=sw.elapsed)
    for seed in sorted(result.runs):
        s = result.runs[seed].summary()
        print(json.dumps(s))
    print(f"wrote {len(paths)} files to {paths[0].parent}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    return _run(args, [args.seed] if args.seed is not None else None)


def cmd_sweep(args) -> int:
    return _run(args, args.seeds)


def cmd_bounds(args) -> int:
    T = int(float(args.horizon))
    cps = geometric_checkpoints(T, args.checkpoints) if args.checkpoints else [T]
    values = bound_curve(args.policy, args.k, T, args.delta, args.gap, cps)
    print(f"# {BOUND_LABELS[args.policy]}")
    print("t,bound")
    for t, v in zip(cps, values):
        print(f"{t},{float(v)!r}")
    return EXIT_OK


def cmd_validate_env(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        env = environment_from_spec(cfg.environment, cfg.horizon, cfg.base_dir)
    elif args.env_file:
        env = env_from_file(args.env_file, int(float(args.horizon)) if args.horizon else None)
    else:
        raise ParamError("validate-env needs --config or --env-file")
    if args.i_star is not None:
        i_star = args.i_star - 1
    else:
        cum = np.zeros(env.k)
        for r0 in range(0, env.horizon, 1 << 15):
            cum += env.block(r0, min(1 << 15, env.horizon - r0))[1].sum(axis=0)
        i_star = hindsight_best(cum)
    cert = check_fixed_gap(env, i_star, args.delta)
    print(json.dumps(cert.to_json(), indent=2))
    if args.strict and not cert.valid:
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    eps = args.epsilon
    if eps is None:
        if args.horizon is None:
            raise ParamError("give --epsilon or --horizon (for the tuned epsilon)")
        eps = tuned_epsilon(args.k, int(float(args.horizon)), args.c)
    m = lower_bound_instance(args.k, eps, args.m)
    save_sequence(args.out, [m] * args.count, cycle=args.cycle)
    print(json.dumps({"k": args.k, "epsilon": eps, "m": args.m, "count": args.count,
                      "borda_scores": borda_scores(m).values.tolist()}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="duelbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeds_flag):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--checkpoints", type=int, help="number of geometric checkpoints")
        sp.add_argument("--threads", type=int, help="worker threads for the seed sweep")
        sp.add_argument("--diagnostics", action="store_true",
                        help="attach policy snapshots (diag_* columns) to trace rows")
        sp.add_argument("--backend", choices=["cython", "python"], help="kernel backend")
        if seeds_flag == "seed":
            sp.add_argument("--seed", type=int)
        else:
            sp.add_argument("--seeds", help="'0:50', '1,2,3' (default: from config)")

    sp = sub.add_parser("run", help="run one config for one seed")
    common(sp, "seed")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run one config over many seeds and aggregate")
    common(sp, "seeds")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bounds", help="print a theoretical regret bound curve")
    sp.add_argument("--policy", required=True, choices=sorted(BOUND_LABELS))
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--horizon", required=True)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--gap", type=float, help="fixed gap Delta (bcb)")
    sp.add_argument("--checkpoints", type=int, default=0)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("validate-env", help="check the fixed-gap condition of an environment")
    sp.add_argument("--config")
    sp.add_argument("--env-file")
    sp.add_argument("--horizon")
    sp.add_argument("--i-star", type=int, help="1-based item (default: hindsight winner)")
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--strict", action="store_true", help="exit 3 if the certificate is invalid")
    sp.set_defaults(func=cmd_validate_env)

    sp = sub.add_parser("gen-instance", help="write a block hard instance as a sequence file")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--horizon", help="with no --epsilon, use the tuned epsilon for this T")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--cycle", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_instance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SeedFailure as exc:
        code = EXIT_CONFIG if isinstance(exc.cause, _CONFIG_ERRORS) else EXIT_RUNTIME
        print(f"error: {exc}", file=sys.stderr)
        return code
    except GapViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DuelBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
