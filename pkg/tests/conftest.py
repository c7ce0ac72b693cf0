import numpy as np
import pytest

from numrange.linalg import RngState, complex_gaussian

# criterion number -> (passed, summary), filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def gaussian_matrix(n: int, seed: int) -> np.ndarray:
    return complex_gaussian(n, n, RngState(seed))


@pytest.fixture
def rng():
    return RngState(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}")
