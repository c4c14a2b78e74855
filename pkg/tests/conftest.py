import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "props",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("props")


def brute_difference(a, n):
    """Δⁿ by the binomial sum, on the zero-padded window (k from −n)."""
    a = list(a)
    padded = [0.0] * n + a + [0.0] * n
    out = []
    for k in range(len(a) + n):
        out.append(sum((-1) ** (n - j) * math.comb(n, j) * padded[k + j] for j in range(n + 1)))
    return out


def brute_sign_changes(a, tol=0.0):
    """Longest alternating subsequence, by enumeration over sign runs."""
    signs = [1 if x > tol else -1 for x in a if abs(x) > tol]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def circle_points(n=32):
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    return np.exp(1j * t)


@pytest.fixture
def circle32():
    return circle_points(32)


# acceptance results, filled by test_acceptance.py and summarised at the end
ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE[criterion] = (passed, detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
