from fractions import Fraction

import pytest

from sharedcache.model import Association, SystemConfig

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def ex1():
    """N = K = 8, L = 4, M = 4, profile (3, 2, 2, 1)."""
    cfg = SystemConfig(8, 8, 4, Fraction(4), 6 * 16)
    return cfg, Association.from_profile((3, 2, 2, 1))


@pytest.fixture
def ex3():
    """N = K = 9, L = M = 3, profile (3, 3, 3)."""
    cfg = SystemConfig(9, 9, 3, Fraction(3), 3 * 16)
    return cfg, Association.from_profile((3, 3, 3))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
