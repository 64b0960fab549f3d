"""Experiment orchestration: configs, seeded runs, sweeps, bounds and outputs."""

from .bounds import BOUND_LABELS, bound_curve
from .config import ExperimentConfig, geometric_checkpoints, parse_seeds
from .output import emit_outputs
from .runner import (
    AggregateSummary,
    RunResult,
    SeedFailure,
    SweepResult,
    aggregate,
    mc_expected_regret,
    run_rngs,
    run_single,
    run_sweep,
    simulate,
)
