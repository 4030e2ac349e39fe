"""Shared fixtures and hypothesis profile."""
import numpy as np
import pytest
from hypothesis import settings

from lineshape.bath import BathSpec

settings.register_profile("lineshape", deadline=None, max_examples=40)
settings.load_profile("lineshape")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def toggle_bath():
    """s = 0.1, w_c = 0.5, k_B T = w0 / 5."""
    return BathSpec(0.1, 0.5, 5.0)


def random_op(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


#: Criterion number -> (passed, detail); filled by test_acceptance.py.
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    """Store and print one acceptance verdict."""
    ACCEPTANCE[number] = (bool(passed), detail)
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")
