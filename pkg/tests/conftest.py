import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from duelbench import PreferenceMatrix, lower_bound_instance

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion id -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def k2():
    return PreferenceMatrix(np.array([[0.5, 0.7], [0.3, 0.5]]))


@pytest.fixture
def i0_k4():
    return lower_bound_instance(4, 0.05, 0)


@pytest.fixture
def i1_k4():
    return lower_bound_instance(4, 0.05, 1)


def random_matrix(k: int, rng: np.random.Generator) -> PreferenceMatrix:
    upper = rng.uniform(0.0, 1.0, size=(k, k))
    p = np.triu(upper, 1)
    p = p + np.tril(1.0 - p.T, -1)
    np.fill_diagonal(p, 0.5)
    return PreferenceMatrix(p)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
