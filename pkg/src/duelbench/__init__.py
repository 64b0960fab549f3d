"""Adversarial dueling bandits under Borda-score regret.

Algorithms (Dueling-EXP3, its high-probability variant, Borda-Confidence-
Bound), oblivious environment generators including block-structured hard
instances, ground-truth regret accounting and a seeded benchmark harness.
"""

from ._backend import BACKEND
from .environments import (
    EnvironmentStream,
    FixedGapCertificate,
    check_fixed_gap,
    env_from_file,
    fixed_gap_env,
    lower_bound_instance,
    sample_feedback,
    stationary_env,
    tuned_epsilon,
)
from .preference import (
    PreferenceMatrix,
    ScoreVector,
    borda_scores,
    hindsight_best,
    regret_increment,
    shifted_scores,
    validate_matrix,
)
from .regret import RegretResult, RegretTrace

__version__ = "0.1.0"
