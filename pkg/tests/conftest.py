import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Store one acceptance outcome; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
